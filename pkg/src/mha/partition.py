"""Nested dyadic partitions of the observation cube and context matching.

At level ``h`` each axis of ``[-D, D]`` is cut into ``2**h`` equal cells,
half-open on the right except the last one, which is closed.  Cell ids are
lexicographic in the per-axis indices with the first axis most significant.
"""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import ObservationRangeError


@dataclass(frozen=True)
class PartitionFamily:
    D: float
    d: int

    @classmethod
    def from_geometry(cls, geometry) -> "PartitionFamily":
        return cls(float(geometry.D), int(geometry.d))

    def n_cells(self, h: int) -> int:
        return 2 ** (h * self.d)

    def max_diameter(self, h: int) -> float:
        return 2.0 * self.D * np.sqrt(self.d) / 2**h

    def axis_indices(self, X, h: int) -> np.ndarray:
        """Per-axis cell indices of a batch ``X`` (shape ``(s, d)``) at level ``h``."""
        if h < 1:
            raise ValueError("partition level h must be >= 1")
        if h * self.d > 62:
            raise ValueError("h * d > 62 overflows 64-bit cell ids")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.d:
            raise ObservationRangeError(f"observations must have {self.d} coordinates")
        if not np.all(np.abs(X) <= self.D):
            raise ObservationRangeError(f"observation outside [-{self.D}, {self.D}]^{self.d}")
        side = 2**h
        idx = np.floor((X + self.D) / (2.0 * self.D) * side).astype(np.int64)
        return np.minimum(idx, side - 1)

    def quantize_many(self, X, h: int) -> np.ndarray:
        idx = self.axis_indices(X, h)
        side = 2**h
        ids = np.zeros(idx.shape[0], dtype=np.int64)
        for j in range(self.d):
            ids = ids * side + idx[:, j]
        return ids

    def quantize(self, x, h: int) -> int:
        return int(self.quantize_many(np.reshape(x, (1, -1)), h)[0])

    def split_id(self, cell_id: int, h: int) -> tuple:
        side = 2**h
        out = []
        for _ in range(self.d):
            cell_id, r = divmod(int(cell_id), side)
            out.append(r)
        return tuple(reversed(out))

    def parent(self, cell_id: int, h: int) -> int:
        """Id at level ``h - 1`` of the cell containing level-``h`` cell ``cell_id``."""
        side = 2 ** (h - 1)
        pid = 0
        for a in self.split_id(cell_id, h):
            pid = pid * side + a // 2
        return pid


@dataclass(frozen=True)
class ContextString:
    """The quantized window ``q_h(x_{n-k}), ..., q_h(x_{n-1})``."""

    ids: tuple

    @property
    def k(self) -> int:
        return len(self.ids)

    def key(self) -> bytes:
        return np.asarray(self.ids, dtype="<i8").tobytes()


def _key(ids) -> bytes:
    return np.asarray(ids, dtype="<i8").tobytes()


def quantize_window(history: Sequence, n: int, k: int, h: int,
                    family: PartitionFamily) -> Optional[ContextString]:
    """Context of round ``n`` from ``x_{n-k}..x_{n-1}``; ``None`` when ``n - 1 < k``.

    ``history`` holds ``x_1, x_2, ...`` (1-based in the round numbering).
    """
    if k < 1:
        raise ValueError("window length k must be >= 1")
    if n - 1 < k or len(history) < n - 1:
        return None
    window = np.asarray(history[n - 1 - k:n - 1], dtype=float).reshape(k, family.d)
    return ContextString(tuple(int(i) for i in family.quantize_many(window, h)))


class ContextIndex:
    """Incremental map from context string to the rounds it preceded.

    After ``push`` has been called with ``x_1..x_t``, ``lookup(w)`` lists the
    indices ``i`` with ``k < i <= t`` whose window ``x_{i-k}..x_{i-1}``
    quantizes to ``w``, in ascending order.
    """

    def __init__(self, family: PartitionFamily, k: int, h: int):
        if k < 1 or h < 1:
            raise ValueError("k and h must be >= 1")
        self.family = family
        self.k = k
        self.h = h
        self.ids: list[int] = []
        self.index: dict[bytes, list[int]] = {}

    def __len__(self) -> int:
        return len(self.ids)

    def push(self, x, cell_id: Optional[int] = None) -> Optional[bytes]:
        """Record the next observation; return the key index ``i = t`` was filed under."""
        if cell_id is None:
            cell_id = self.family.quantize(x, self.h)
        self.ids.append(int(cell_id))
        t = len(self.ids)
        if t <= self.k:
            return None
        key = _key(self.ids[t - 1 - self.k:t - 1])
        self.index.setdefault(key, []).append(t)
        return key

    def current_key(self) -> Optional[bytes]:
        """Key of the context for the next round, from the last ``k`` observations."""
        if len(self.ids) < self.k:
            return None
        return _key(self.ids[len(self.ids) - self.k:])

    def lookup(self, w, n: Optional[int] = None) -> list[int]:
        if isinstance(w, ContextString):
            key = w.key()
        elif isinstance(w, bytes):
            key = w
        else:
            key = _key(w)
        hits = self.index.get(key, [])
        if n is None:
            return list(hits)
        return hits[:bisect_left(hits, n)]


def match_set(history: Sequence, n: int, k: int, h: int, w,
              family: PartitionFamily) -> list[int]:
    """Indices ``i`` with ``k < i < n`` whose preceding ``k``-window quantizes to ``w``."""
    idx = ContextIndex(family, k, h)
    if n - 1 > 0:
        cells = family.quantize_many(np.asarray(history[:n - 1], dtype=float).reshape(-1, family.d), h)
        for c in cells:
            idx.push(None, cell_id=int(c))
    return idx.lookup(w, n)
