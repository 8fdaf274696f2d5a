"""Regularized empirical saddle points.

The dual variable is scalar, so for a fixed decision ``y`` the inner
maximisation over ``lam`` in ``[0, lambda_max]`` has a closed form.  What is
left is the convex function

    g(y) = mean u(y, x) + rho ||y||^2 + max_lam [lam (mean c(y, x) - gamma) - rho lam^2]

which is minimised by projected gradient descent with an Armijo backtracking
line search.  By the envelope theorem
``grad g(y) = grad mean u(y) + 2 rho y + lam*(y) grad mean c(y)``.
"""
from __future__ import annotations

from dataclasses import dataclass
import math
from typing import Callable

import numpy as np

from .core import LossSpec, LossSpecError, ProblemGeometry, _fd_gradient, project_decision

ARMIJO = 1e-4
MAX_HALVINGS = 60


@dataclass(frozen=True)
class SaddlePoint:
    y_star: np.ndarray
    lambda_star: float
    value: float
    iterations: int
    residual: float
    success: bool


class EmpiricalObjective:
    """Average of the regularized Lagrangian over a (weighted) sample.

    ``weights`` are multiplicities of the rows of ``sample``; repeated
    observations can be collapsed into a single row with a count.
    """

    def __init__(self, sample, spec: LossSpec, geometry: ProblemGeometry,
                 rho: float, weights=None):
        X = np.atleast_2d(np.asarray(sample, dtype=float))
        if X.shape[0] == 0:
            raise ValueError("empirical objective needs a nonempty sample")
        if rho < 0:
            raise ValueError("rho must be nonnegative")
        if weights is None:
            w = np.full(X.shape[0], 1.0 / X.shape[0])
        else:
            w = np.asarray(weights, dtype=float)
            if w.shape != (X.shape[0],) or np.any(w < 0) or w.sum() <= 0:
                raise ValueError("weights must be nonnegative with a positive sum")
            w = w / w.sum()
        self.sample = X
        self.weights = w
        self.spec = spec
        self.geometry = geometry
        self.rho = float(rho)
        self._grad_u = spec.grad_u or (lambda y, X: _fd_gradient(spec.u, y, X))
        self._grad_c = spec.grad_c or (lambda y, X: _fd_gradient(spec.c, y, X))

    @property
    def gamma(self) -> float:
        return self.geometry.gamma

    @property
    def lambda_max(self) -> float:
        return self.geometry.lambda_max

    def _mean(self, fn, y) -> float:
        val = float(self.weights @ fn(y, self.sample))
        if not math.isfinite(val):
            raise LossSpecError(f"loss is not finite at y={y}")
        return val

    def mean_main(self, y) -> float:
        return self._mean(self.spec.u, np.asarray(y, dtype=float))

    def mean_constraint(self, y) -> float:
        return self._mean(self.spec.c, np.asarray(y, dtype=float))

    def best_lambda(self, slack: float) -> float:
        """Maximiser of ``lam * slack - rho * lam**2`` over ``[0, lambda_max]``."""
        if self.rho > 0:
            return min(max(slack / (2.0 * self.rho), 0.0), self.lambda_max)
        return self.lambda_max if slack > 0 else 0.0

    def value(self, y) -> float:
        """``g(y)``: the regularized objective maximised over the dual interval."""
        slack = self.mean_constraint(y) - self.gamma
        lam = self.best_lambda(slack)
        return self.mean_main(y) + self.rho * float(y @ y) + lam * slack - self.rho * lam * lam

    def grad(self, y) -> np.ndarray:
        """Envelope-theorem gradient of :meth:`value`."""
        lam = self.best_lambda(self.mean_constraint(y) - self.gamma)
        g = self.weights @ self._grad_u(y, self.sample) + 2.0 * self.rho * y
        if lam > 0:
            g = g + lam * (self.weights @ self._grad_c(y, self.sample))
        return g

    def objective(self, y, lam: float) -> float:
        """Regularized sample Lagrangian at an arbitrary ``(y, lam)``."""
        y = np.asarray(y, dtype=float)
        slack = self.mean_constraint(y) - self.gamma
        return self.mean_main(y) + lam * slack + self.rho * (float(y @ y) - lam * lam)


def inner_lambda(y, obj: EmpiricalObjective) -> float:
    """Exact maximiser over the dual interval for fixed ``y``; ties at zero slack go to 0."""
    return obj.best_lambda(obj.mean_constraint(y) - obj.gamma)


def projected_gradient(value: Callable, grad: Callable, project: Callable, y0,
                       tol: float = 1e-6, max_iters: int = 10_000):
    """Minimise a convex function over a convex set by projected gradient descent.

    Each line search starts from the Barzilai-Borwein step (1.0 on the first
    iteration) and halves until the Armijo condition holds.  Returns
    ``(y, value, iterations, residual, success)``; ``residual`` is the norm of
    the last step.
    """
    y = project(np.asarray(y0, dtype=float))
    f = value(y)
    g = grad(y)
    residual = math.inf
    trial = 1.0
    for it in range(1, max_iters + 1):
        if not np.all(np.isfinite(g)):
            raise LossSpecError("non-finite gradient")
        step = trial
        for _ in range(MAX_HALVINGS):
            z = project(y - step * g)
            fz = value(z)
            if fz <= f + ARMIJO * float(g @ (z - y)):
                break
            step *= 0.5
        dy = z - y
        residual = math.sqrt(float(dy @ dy))
        if residual <= tol:
            if fz <= f:
                y, f = z, fz
            return y, f, it, residual, True
        if fz > f:
            # line search exhausted without progress
            return y, f, it, residual, False
        gz = grad(z)
        dg = gz - g
        curv = float(dy @ dg)
        trial = min(max(float(dy @ dy) / curv, 1e-10), 1e10) if curv > 0 else 1.0
        y, f, g = z, fz, gz
    return y, f, max_iters, residual, False


def solve_saddle(obj: EmpiricalObjective, tol: float = 1e-6, max_iters: int = 10_000,
                 y_init=None) -> SaddlePoint:
    """Saddle point of the regularized empirical Lagrangian.

    With ``rho > 0`` the problem is strictly convex-concave and the saddle
    point is unique.  ``rho == 0`` runs in best-effort mode.
    """
    geom = obj.geometry
    if y_init is None:
        y_init = project_decision(np.zeros(geom.m), geom)
    y, val, iters, residual, ok = projected_gradient(
        obj.value, obj.grad, geom.decision_set.project, y_init, tol, max_iters)
    return SaddlePoint(y_star=y, lambda_star=inner_lambda(y, obj), value=val,
                       iterations=iters, residual=residual, success=ok)


def default_prediction(geometry: ProblemGeometry):
    """Fallback pair ``(y_0, 0)`` with ``y_0`` the projection of the origin."""
    return project_decision(np.zeros(geometry.m), geometry), 0.0
