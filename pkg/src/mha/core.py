"""Problem geometry, loss contract and the instantaneous Lagrangian.

Loss functions are vectorised over observations: ``u(y, X)`` takes a decision
``y`` of shape ``(m,)`` and a batch ``X`` of shape ``(s, d)`` and returns an
array of shape ``(s,)``.  Gradients (when given) return shape ``(s, m)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

FEAS_TOL = 1e-9


class ConfigError(ValueError):
    """Invalid geometry, loss or experiment configuration."""


class LossSpecError(ArithmeticError):
    """A loss function returned a non-finite value."""


class ObservationRangeError(ValueError):
    """An observation fell outside the cube [-D, D]^d."""


@dataclass(frozen=True)
class DecisionSet:
    """Convex compact decision set: an axis-aligned box or the probability simplex."""

    kind: str
    m: int
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    @classmethod
    def box(cls, lower, upper) -> "DecisionSet":
        lo = np.atleast_1d(np.asarray(lower, dtype=float))
        hi = np.atleast_1d(np.asarray(upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ConfigError("box bounds must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ConfigError("box bounds must be finite")
        if np.any(lo > hi):
            raise ConfigError("box lower bound exceeds upper bound")
        lo.setflags(write=False)
        hi.setflags(write=False)
        return cls("box", lo.size, lo, hi)

    @classmethod
    def simplex(cls, m: int) -> "DecisionSet":
        if m < 1:
            raise ConfigError("simplex dimension must be positive")
        return cls("simplex", int(m))

    def project(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.m,):
            raise ValueError(f"expected a vector of length {self.m}, got shape {v.shape}")
        if self.kind == "box":
            return np.minimum(np.maximum(v, self.lower), self.upper)
        if self.kind == "simplex":
            return _project_simplex(v)
        raise ConfigError(f"unsupported decision set kind {self.kind!r}")

    def contains(self, v, tol: float = FEAS_TOL) -> bool:
        v = np.asarray(v, dtype=float)
        return bool(np.linalg.norm(self.project(v) - v) <= tol)


def _project_simplex(v: np.ndarray) -> np.ndarray:
    # sort-based Euclidean projection (Held, Wolfe & Crowder)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


@dataclass(frozen=True)
class ProblemGeometry:
    d: int
    D: float
    decision_set: DecisionSet
    lambda_max: float
    gamma: float

    def __post_init__(self):
        if self.d < 1:
            raise ConfigError("observation dimension d must be positive")
        if not self.D > 0:
            raise ConfigError("cube half-width D must be positive")
        if not self.lambda_max > 0:
            raise ConfigError("lambda_max must be positive")
        if not np.isfinite(self.gamma):
            raise ConfigError("gamma must be finite")

    @property
    def m(self) -> int:
        return self.decision_set.m

    def check_observation(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.d,):
            raise ObservationRangeError(f"observation must have shape ({self.d},), got {x.shape}")
        if not np.all(np.abs(x) <= self.D):
            raise ObservationRangeError(f"observation {x} outside [-{self.D}, {self.D}]^{self.d}")
        return x

    def check_lambda(self, lam: float) -> float:
        lam = float(lam)
        if not 0.0 <= lam <= self.lambda_max:
            raise ValueError(f"dual variable {lam} outside [0, {self.lambda_max}]")
        return lam


def project_decision(v, geometry: ProblemGeometry) -> np.ndarray:
    """Euclidean projection of ``v`` onto the decision set."""
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot project a non-finite vector")
    return geometry.decision_set.project(v)


LossFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _fd_gradient(fn: LossFn, y: np.ndarray, X: np.ndarray) -> np.ndarray:
    h = 1e-6 * (1.0 + np.linalg.norm(y))
    out = np.empty((X.shape[0], y.size))
    for j in range(y.size):
        e = np.zeros_like(y)
        e[j] = h
        out[:, j] = (fn(y + e, X) - fn(y - e, X)) / (2 * h)
    return out


@dataclass(frozen=True)
class LossSpec:
    """Main loss ``u`` and constraint loss ``c``, both convex in the decision.

    ``convex`` and ``continuous`` are caller assertions; they are recorded,
    not proved.  Missing gradients fall back to central differences.
    """

    u: LossFn
    c: LossFn
    grad_u: Optional[LossFn] = None
    grad_c: Optional[LossFn] = None
    convex: bool = True
    continuous: bool = True
    name: str = field(default="custom", compare=False)

    def _eval(self, fn: LossFn, y, X, which: str) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        X = np.atleast_2d(np.asarray(X, dtype=float))
        val = np.asarray(fn(y, X), dtype=float)
        if not np.all(np.isfinite(val)):
            raise LossSpecError(f"{which}-loss returned a non-finite value at y={y}")
        return val

    def main(self, y, X) -> np.ndarray:
        return self._eval(self.u, y, X, "main")

    def constraint(self, y, X) -> np.ndarray:
        return self._eval(self.c, y, X, "constraint")

    def main_grad(self, y, X) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        X = np.atleast_2d(np.asarray(X, dtype=float))
        g = self.grad_u(y, X) if self.grad_u is not None else _fd_gradient(self.u, y, X)
        return _check_grad(g, "main")

    def constraint_grad(self, y, X) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        X = np.atleast_2d(np.asarray(X, dtype=float))
        g = self.grad_c(y, X) if self.grad_c is not None else _fd_gradient(self.c, y, X)
        return _check_grad(g, "constraint")


def _check_grad(g, which: str) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(g)):
        raise LossSpecError(f"{which}-loss gradient is not finite")
    return g


def lagrangian(y, lam: float, x, spec: LossSpec, gamma: float) -> float:
    """Instantaneous Lagrangian ``u(y, x) + lam * (c(y, x) - gamma)``."""
    u = spec.main(y, x)[0]
    c = spec.constraint(y, x)[0]
    return float(u + lam * (c - gamma))


def regularized_lagrangian(y, lam: float, x, spec: LossSpec, gamma: float, rho: float) -> float:
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    y = np.asarray(y, dtype=float)
    return lagrangian(y, lam, x, spec, gamma) + rho * (float(y @ y) - lam * lam)


def midpoint_convexity_violation(fn: LossFn, a, b, X) -> float:
    """Largest ``f((a+b)/2) - (f(a)+f(b))/2`` over the batch ``X``; <= 0 for convex ``f``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    X = np.atleast_2d(X)
    return float(np.max(fn((a + b) / 2, X) - (fn(a, X) + fn(b, X)) / 2))
