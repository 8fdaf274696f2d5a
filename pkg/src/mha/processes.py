"""Seedable stationary ergodic observation processes.

All randomness goes through ``numpy.random.Generator(PCG64(seed))``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ConfigError

AR1_BURN_IN = 10_000
PROB_TOL = 1e-12


def rng_from_seed(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & (2**64 - 1)))


@dataclass(frozen=True)
class DiscreteLaw:
    points: np.ndarray  # (s, d)
    probs: np.ndarray   # (s,)

    def mean(self, f) -> float:
        return float(self.probs @ f(self.points))


@dataclass(frozen=True)
class MarkovLaw:
    points: np.ndarray      # (s, d) state locations
    stationary: np.ndarray  # (s,)
    transition: np.ndarray  # (s, s) row-stochastic

    def conditional(self, state: int) -> DiscreteLaw:
        return DiscreteLaw(self.points, self.transition[state])

    def marginal(self) -> DiscreteLaw:
        return DiscreteLaw(self.points, self.stationary)


@dataclass(frozen=True)
class ProcessSpec:
    kind: str
    seed: int = 0
    points: Optional[np.ndarray] = None
    probs: Optional[np.ndarray] = None
    transition: Optional[np.ndarray] = None
    phi: float = 0.0
    sigma: float = 0.0
    d: int = 1
    D: float = 1.0

    @classmethod
    def iid(cls, points, probs, seed: int = 0) -> "ProcessSpec":
        pts = _as_points(points)
        return cls("iid", seed, points=pts, probs=np.asarray(probs, dtype=float), d=pts.shape[1])

    @classmethod
    def markov(cls, points, transition, seed: int = 0) -> "ProcessSpec":
        pts = _as_points(points)
        return cls("markov", seed, points=pts, transition=np.asarray(transition, dtype=float),
                   d=pts.shape[1])

    @classmethod
    def ar1(cls, phi: float, sigma: float, d: int = 1, D: float = 1.0, seed: int = 0) -> "ProcessSpec":
        return cls("ar1", seed, phi=float(phi), sigma=float(sigma), d=int(d), D=float(D))

    def with_seed(self, seed: int) -> "ProcessSpec":
        return ProcessSpec(self.kind, seed, self.points, self.probs, self.transition,
                           self.phi, self.sigma, self.d, self.D)

    def validate(self, D: Optional[float] = None) -> None:
        """Raise :class:`ConfigError` unless this describes a valid process."""
        if self.kind == "iid":
            _check_probs(self.probs, len(self.points))
        elif self.kind == "markov":
            P = self.transition
            s = len(self.points)
            if P is None or P.shape != (s, s):
                raise ConfigError("transition matrix must be square with one row per state")
            for row in P:
                _check_probs(row, s)
            if not is_primitive(P):
                raise ConfigError("Markov chain must be irreducible and aperiodic")
        elif self.kind == "ar1":
            if not abs(self.phi) < 1:
                raise ConfigError("AR(1) coefficient must satisfy |phi| < 1")
            if self.sigma < 0:
                raise ConfigError("AR(1) noise scale must be nonnegative")
            if not self.D > 0:
                raise ConfigError("AR(1) clip half-width must be positive")
        else:
            raise ConfigError(f"unknown process kind {self.kind!r}")
        bound = self.D if D is None and self.kind == "ar1" else D
        if self.points is not None and bound is not None and np.any(np.abs(self.points) > bound):
            raise ConfigError(f"support points must lie in [-{bound}, {bound}]^d")


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ConfigError("support points must be a nonempty (s, d) array")
    return pts


def _check_probs(p, s: int) -> None:
    if p is None:
        raise ConfigError("missing probabilities")
    p = np.asarray(p, dtype=float)
    if p.shape != (s,):
        raise ConfigError(f"expected {s} probabilities, got shape {p.shape}")
    if np.any(p < 0) or abs(p.sum() - 1.0) > PROB_TOL:
        raise ConfigError("probabilities must be nonnegative and sum to 1")


def is_primitive(P) -> bool:
    """True iff some power ``P^t`` with ``t <= s^2`` is entrywise positive."""
    A = (np.asarray(P) > 0).astype(np.int64)
    s = A.shape[0]
    M = A.copy()
    for _ in range(s * s):
        if np.all(M > 0):
            return True
        M = ((M @ A) > 0).astype(np.int64)
    return bool(np.all(M > 0))


def stationary_distribution(P, tol: float = 1e-12, max_iters: int = 100_000) -> np.ndarray:
    """Solve ``pi P = pi`` by an eigenvector start refined with power iteration."""
    P = np.asarray(P, dtype=float)
    vals, vecs = np.linalg.eig(P.T)
    pi = np.abs(np.real(vecs[:, np.argmin(np.abs(vals - 1.0))]))
    pi /= pi.sum()
    for _ in range(max_iters):
        nxt = pi @ P
        nxt /= nxt.sum()
        done = np.abs(nxt - pi).sum() <= tol
        pi = nxt
        if done:
            break
    return pi


def stationary_law(spec: ProcessSpec):
    """Marginal law (iid) or stationary + conditional laws (Markov)."""
    spec.validate()
    if spec.kind == "iid":
        return DiscreteLaw(spec.points, spec.probs)
    if spec.kind == "markov":
        return MarkovLaw(spec.points, stationary_distribution(spec.transition), spec.transition)
    raise ConfigError("AR(1) has no closed-form law here; sample it with generate()")


def generate(spec: ProcessSpec, N: int, return_states: bool = False):
    """Draw ``N`` observations as an ``(N, d)`` array; deterministic given ``spec.seed``.

    For Markov specs ``return_states=True`` also returns the state indices.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    spec.validate()
    rng = rng_from_seed(spec.seed)
    if spec.kind == "iid":
        idx = rng.choice(len(spec.points), size=N, p=spec.probs)
        out = spec.points[idx]
        return (out, idx) if return_states else out
    if spec.kind == "markov":
        P = spec.transition
        pi = stationary_distribution(P)
        cum = np.cumsum(P, axis=1)
        cum[:, -1] = 1.0
        u = rng.random(N)
        states = np.empty(N, dtype=np.int64)
        s = int(rng.choice(len(pi), p=pi))
        states[0] = s
        for t in range(1, N):
            s = int(np.searchsorted(cum[s], u[t], side="right"))
            states[t] = s
        out = spec.points[states]
        return (out, states) if return_states else out
    if return_states:
        raise ConfigError("return_states is only defined for Markov processes")
    noise = rng.standard_normal((AR1_BURN_IN + N, spec.d)) * spec.sigma
    x = np.zeros(spec.d)
    out = np.empty((N, spec.d))
    for t in range(AR1_BURN_IN + N):
        x = np.clip(spec.phi * x + noise[t], -spec.D, spec.D)
        if t >= AR1_BURN_IN:
            out[t - AR1_BURN_IN] = x
    return out
