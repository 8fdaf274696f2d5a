"""Histogram experts H(k, h) and the two constant experts.

A grid expert quantizes the last ``k`` observations at partition level ``h``,
collects every earlier round that followed the same quantized context and
plays the regularized empirical saddle point of that sample with
``rho = 1/n + 1/h + 1/k``.  With an empty match it plays ``(y_0, 0)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import LossSpec, LossSpecError, ProblemGeometry
from .partition import ContextIndex, PartitionFamily
from .saddle import EmpiricalObjective, default_prediction, solve_saddle

log = logging.getLogger(__name__)

GRID, CONST_MAX, CONST_ZERO = "grid", "const_max", "const_zero"
_KIND_ORDER = {CONST_MAX: 0, CONST_ZERO: 1, GRID: 2}


@dataclass(frozen=True, order=False)
class ExpertId:
    kind: str
    k: int = 0
    h: int = 0

    def __post_init__(self):
        if self.kind not in _KIND_ORDER:
            raise ValueError(f"unknown expert kind {self.kind!r}")
        if self.kind == GRID and (self.k < 1 or self.h < 1):
            raise ValueError("grid experts need k >= 1 and h >= 1")

    def sort_key(self):
        return (_KIND_ORDER[self.kind], self.k, self.h)

    def __str__(self):
        return f"H({self.k},{self.h})" if self.kind == GRID else self.kind

    @classmethod
    def parse(cls, text: str) -> "ExpertId":
        """Parse ``const_max``, ``const_zero`` or ``k,h`` / ``H(k,h)``."""
        t = text.strip()
        if t in (CONST_MAX, CONST_ZERO):
            return cls(t)
        t = t.removeprefix("H").strip("()")
        k, h = (int(s) for s in t.replace(":", ",").split(","))
        return cls(GRID, k, h)


def prior_weights(ids) -> np.ndarray:
    """``alpha(k, h) ~ 2^-(k+h)`` for grid experts, 1/8 per constant expert, normalised."""
    raw = np.array([2.0 ** -(e.k + e.h) if e.kind == GRID else 0.125 for e in ids])
    return raw / raw.sum()


class _SampleStore:
    """Distinct observations with multiplicities, grouped by context key."""

    __slots__ = ("rows", "counts", "where")

    def __init__(self):
        self.rows: list[np.ndarray] = []
        self.counts: list[int] = []
        self.where: dict[bytes, int] = {}

    def add(self, x: np.ndarray):
        b = x.tobytes()
        j = self.where.get(b)
        if j is None:
            self.where[b] = len(self.rows)
            self.rows.append(x.copy())
            self.counts.append(1)
        else:
            self.counts[j] += 1

    def arrays(self):
        return np.vstack(self.rows), np.asarray(self.counts, dtype=float)


@dataclass
class ExpertState:
    id: ExpertId
    prediction: tuple
    index: Optional[ContextIndex] = None
    cum_y: float = 0.0
    cum_lambda: float = 0.0
    own_u: float = 0.0
    own_c: float = 0.0
    own_l: float = 0.0
    own_lambda: float = 0.0
    failures: int = 0
    samples: dict = field(default_factory=dict)
    warm: dict = field(default_factory=dict)
    rounds_seen: int = 0

    def observe(self, x):
        """Append the revealed observation to the context index and sample store."""
        x = np.asarray(x, dtype=float)
        self.rounds_seen += 1
        if self.index is None:
            return
        key = self.index.push(x)
        if key is not None:
            self.samples.setdefault(key, _SampleStore()).add(x)


def make_expert(eid: ExpertId, geometry: ProblemGeometry,
                family: Optional[PartitionFamily] = None) -> ExpertState:
    y0, _ = default_prediction(geometry)
    if eid.kind == CONST_MAX:
        return ExpertState(eid, (y0, geometry.lambda_max))
    if eid.kind == CONST_ZERO:
        return ExpertState(eid, (y0, 0.0))
    family = family or PartitionFamily.from_geometry(geometry)
    return ExpertState(eid, (y0, 0.0), index=ContextIndex(family, eid.k, eid.h))


def build_experts(K: int, H: int, geometry: ProblemGeometry) -> list[ExpertState]:
    """Constant experts plus the truncated grid ``1 <= k <= K, 1 <= h <= H``, in id order."""
    if K < 1 or H < 1:
        raise ValueError("truncation K and H must be >= 1")
    family = PartitionFamily.from_geometry(geometry)
    ids = [ExpertId(CONST_MAX), ExpertId(CONST_ZERO)]
    ids += [ExpertId(GRID, k, h) for k in range(1, K + 1) for h in range(1, H + 1)]
    ids.sort(key=ExpertId.sort_key)
    return [make_expert(e, geometry, family) for e in ids]


def expert_predict(state: ExpertState, history, n: int, geometry: ProblemGeometry,
                   spec: LossSpec, tol: float = 1e-6, max_iters: int = 10_000):
    """Prediction ``(y, lam)`` of one expert for round ``n`` given ``x_1..x_{n-1}``.

    The expert's index is brought up to date with ``history`` first.  A
    solver failure keeps the previous prediction and is logged.
    """
    if state.id.kind != GRID:
        return state.prediction
    if state.rounds_seen > n - 1:
        raise ValueError("expert has already seen observations beyond round n - 1")
    for x in history[state.rounds_seen:n - 1]:
        state.observe(x)

    key = state.index.current_key()
    store = state.samples.get(key) if key is not None else None
    if store is None:
        state.prediction = default_prediction(geometry)
        return state.prediction

    X, counts = store.arrays()
    k, h = state.id.k, state.id.h
    rho = 1.0 / n + 1.0 / h + 1.0 / k
    try:
        obj = EmpiricalObjective(X, spec, geometry, rho, weights=counts)
        sp = solve_saddle(obj, tol=tol, max_iters=max_iters, y_init=state.warm.get(key))
    except (LossSpecError, FloatingPointError, ValueError) as exc:
        state.failures += 1
        log.warning("expert %s failed at round %d (%s); keeping previous prediction",
                    state.id, n, exc)
        return state.prediction
    if not sp.success:
        log.debug("expert %s: solver hit max_iters at round %d (residual %.3g)",
                  state.id, n, sp.residual)
    state.warm[key] = sp.y_star
    state.prediction = (sp.y_star, sp.lambda_star)
    return state.prediction


def update_cumulative(state: ExpertState, own_y_loss: float, own_lambda_loss: float) -> ExpertState:
    """Add ``l(y_e, lam_n, x_n)`` and ``l(y_n, lam_e, x_n)`` to the expert's running sums."""
    if not (math.isfinite(own_y_loss) and math.isfinite(own_lambda_loss)):
        raise LossSpecError("non-finite cumulative-loss addend")
    state.cum_y += own_y_loss
    state.cum_lambda += own_lambda_loss
    return state
