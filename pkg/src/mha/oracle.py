"""Ground-truth constrained optimum for processes with discrete conditional laws.

For every conditioning state the problem

    minimise E[u(y, X)]  subject to  E[c(y, X)] <= gamma,  y in Y

is solved by bisection on the dual variable: for fixed ``lam`` the convex
function ``E[u + lam c]`` is minimised by projected gradient descent and the
sign of ``E[c] - gamma`` at the minimiser decides the next bracket.  For an
i.i.d. law there is a single state; for an order-1 Markov chain the states are
the previous observation and the outer average uses the stationary law.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core import LossSpec, ProblemGeometry
from .processes import DiscreteLaw, MarkovLaw
from .saddle import projected_gradient

BISECTION_TOL = 1e-6
INNER_TOL = 1e-8
CROSS_CHECK_TOL = 1e-3


class OracleError(RuntimeError):
    """The dual bisection and the brute-force grid disagree."""


@dataclass
class StateOptimum:
    weight: float
    y: np.ndarray
    lam: float
    value: float
    constraint: float
    feasible: bool
    reason: str = ""
    trace: list = field(default_factory=list)


@dataclass
class FeasibleOptimum:
    """Constrained optimum averaged over conditioning states.

    ``lambda_star`` is the stationary-weighted dual; ``lambdas`` holds the
    per-state values (a single entry for i.i.d. laws).
    """

    value: float
    lambda_star: float
    decisions: list
    lambdas: np.ndarray
    weights: np.ndarray
    feasible: bool
    states: list
    reason: str = ""

    def to_text(self) -> str:
        lines = [f"feasible={str(self.feasible).lower()}",
                 f"value={self.value!r}",
                 f"lambda_star={self.lambda_star!r}"]
        if self.reason:
            lines.append(f"reason={self.reason}")
        for s, st in enumerate(self.states):
            lines.append(f"state{s}.weight={st.weight!r}")
            lines.append(f"state{s}.y={' '.join(repr(float(v)) for v in st.y)}")
            lines.append(f"state{s}.lambda={st.lam!r}")
            lines.append(f"state{s}.constraint={st.constraint!r}")
        return "\n".join(lines) + "\n"

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_text())
        return path


def _conditioning(law):
    if isinstance(law, DiscreteLaw):
        return [(1.0, law)]
    if isinstance(law, MarkovLaw):
        return [(float(law.stationary[s]), law.conditional(s)) for s in range(len(law.stationary))]
    raise TypeError(f"unsupported law type {type(law).__name__}")


class _Expectation:
    def __init__(self, law: DiscreteLaw, spec: LossSpec):
        keep = law.probs > 0
        self.X = law.points[keep]
        self.p = law.probs[keep] / law.probs[keep].sum()
        self.spec = spec

    def u(self, y) -> float:
        return float(self.p @ self.spec.main(y, self.X))

    def c(self, y) -> float:
        return float(self.p @ self.spec.constraint(y, self.X))

    def lagrangian(self, lam: float):
        """``(value, grad)`` callables of ``y -> E[u(y) + lam c(y)]``."""
        def value(y):
            return self.u(y) + lam * self.c(y)

        def grad(y):
            g = self.p @ self.spec.main_grad(y, self.X)
            if lam:
                g = g + lam * (self.p @ self.spec.constraint_grad(y, self.X))
            return g
        return value, grad

    def constraint_only(self):
        return self.c, lambda y: self.p @ self.spec.constraint_grad(y, self.X)


def _argmin(funcs, geometry, y0, tol=INNER_TOL):
    value, grad = funcs
    y, *_ = projected_gradient(value, grad, geometry.decision_set.project, y0,
                               tol=tol, max_iters=200_000)
    return y


def _solve_state(E: _Expectation, geometry: ProblemGeometry, weight: float,
                 tol: float) -> StateOptimum:
    gamma, lmax = geometry.gamma, geometry.lambda_max
    y0 = geometry.decision_set.project(np.zeros(geometry.m))

    y_feas = _argmin(E.constraint_only(), geometry, y0)
    if E.c(y_feas) >= gamma:
        return StateOptimum(weight, y_feas, 0.0, E.u(y_feas), E.c(y_feas), False,
                            "no decision satisfies the constraint strictly")

    trace = []
    y_lo = _argmin(E.lagrangian(0.0), geometry, y0)
    c_lo = E.c(y_lo)
    trace.append((0.0, c_lo))
    if c_lo <= gamma + tol:
        return StateOptimum(weight, y_lo, 0.0, E.u(y_lo), c_lo, True, trace=trace)

    y_hi = _argmin(E.lagrangian(lmax), geometry, y_lo)
    c_hi = E.c(y_hi)
    trace.append((lmax, c_hi))
    if c_hi > gamma + tol:
        return StateOptimum(weight, y_hi, lmax, E.u(y_hi), c_hi, False,
                            "constraint still violated at lambda_max", trace)

    def active(c, lam):
        # keeps the complementary-slackness residual lam * |c - gamma| within tol
        return abs(c - gamma) * max(lam, 1.0) <= tol

    lo, hi = 0.0, lmax
    y_star, lam_star = y_hi, lmax
    while True:
        if active(c_hi, hi):
            y_star, lam_star = y_hi, hi
            break
        if hi - lo <= 1e-12 * lmax:
            # minimiser jumps across gamma: move along the segment to the active point
            y_star, lam_star = _segment_root(E, y_lo, y_hi, gamma, tol), hi
            break
        mid = 0.5 * (lo + hi)
        y_mid = _argmin(E.lagrangian(mid), geometry, y_hi)
        c_mid = E.c(y_mid)
        trace.append((mid, c_mid))
        if active(c_mid, mid):
            y_star, lam_star = y_mid, mid
            break
        if c_mid > gamma:
            lo, y_lo = mid, y_mid
        else:
            hi, y_hi, c_hi = mid, y_mid, c_mid
    c_star = E.c(y_star)
    return StateOptimum(weight, y_star, lam_star, E.u(y_star), c_star, True, trace=trace)


def _segment_root(E: _Expectation, a, b, gamma: float, tol: float):
    # E.c(a) > gamma >= E.c(b); the constraint is continuous along [a, b]
    lo, hi = 0.0, 1.0
    for _ in range(200):
        t = 0.5 * (lo + hi)
        y = (1 - t) * a + t * b
        if E.c(y) > gamma:
            lo = t
        else:
            hi = t
        if hi - lo < 1e-15:
            break
    y = (1 - hi) * a + hi * b
    return y


def _grid_points(geometry: ProblemGeometry, center=None, radius=None, n: int = 0):
    ds = geometry.decision_set
    m = geometry.m
    if ds.kind == "box":
        lo, hi = np.array(ds.lower, dtype=float), np.array(ds.upper, dtype=float)
        if center is not None:
            lo, hi = np.maximum(lo, center - radius), np.minimum(hi, center + radius)
        axes = [np.linspace(lo[j], hi[j], n) for j in range(m)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, m)
    if m == 1:
        return np.ones((1, 1))
    t_lo, t_hi = 0.0, 1.0
    if center is not None:
        t_lo, t_hi = max(0.0, center[0] - radius), min(1.0, center[0] + radius)
    t = np.linspace(t_lo, t_hi, n)
    return np.stack([t, 1 - t], -1)


def grid_optimum(E: _Expectation, geometry: ProblemGeometry, gamma: float,
                 levels: int = 4) -> Optional[tuple]:
    """Brute-force constrained minimum over nested zooming grids (``m <= 2``)."""
    n = 2001 if geometry.m == 1 or geometry.decision_set.kind == "simplex" else 101
    best = None
    center, radius = None, None
    for _ in range(levels):
        pts = _grid_points(geometry, center, radius, n)
        if best is not None:
            pts = np.vstack([pts, best[1][None, :]])
        for y in pts:
            if E.c(y) <= gamma:
                v = E.u(y)
                if best is None or v < best[0]:
                    best = (v, y.copy())
        if best is None:
            return None
        span = pts.max(axis=0) - pts.min(axis=0)
        radius = 4.0 * float(np.max(span)) / (n - 1) if np.max(span) > 0 else 0.0
        center = best[1] if geometry.decision_set.kind == "box" else best[1][:1]
        if radius == 0.0:
            break
    return best


def solve_feasible_optimum(law, spec: LossSpec, geometry: ProblemGeometry,
                           tol: float = BISECTION_TOL, cross_check: bool = True) -> FeasibleOptimum:
    """Optimal constrained value and dual; an infeasible law yields ``feasible=False``.

    When ``cross_check`` is set and ``m <= 2`` every state's value is compared
    with a brute-force grid search and an :class:`OracleError` is raised on a
    discrepancy above ``1e-3``.
    """
    states = []
    for weight, cond in _conditioning(law):
        E = _Expectation(cond, spec)
        st = _solve_state(E, geometry, weight, tol)
        if st.feasible and cross_check and geometry.m <= 2:
            g = grid_optimum(E, geometry, geometry.gamma + tol)
            if g is None or abs(g[0] - st.value) > CROSS_CHECK_TOL:
                raise OracleError(f"dual bisection value {st.value} disagrees with grid "
                                  f"search {None if g is None else g[0]}")
        states.append(st)

    weights = np.array([s.weight for s in states])
    lambdas = np.array([s.lam for s in states])
    feasible = all(s.feasible for s in states)
    reason = "; ".join(sorted({s.reason for s in states if s.reason}))
    return FeasibleOptimum(
        value=float(weights @ np.array([s.value for s in states])),
        lambda_star=float(weights @ lambdas),
        decisions=[s.y for s in states],
        lambdas=lambdas,
        weights=weights,
        feasible=feasible,
        states=states,
        reason=reason,
    )


def check_complementary_slackness(result: FeasibleOptimum, law, spec: LossSpec,
                                  geometry: ProblemGeometry, tol: float = 1e-6) -> bool:
    """True iff ``|lam * (E[c(y*)] - gamma)| <= tol`` in every conditioning state."""
    if not result.feasible:
        raise ValueError("complementary slackness is only defined for feasible results")
    for (_, cond), st in zip(_conditioning(law), result.states):
        E = _Expectation(cond, spec)
        if abs(st.lam * (E.c(st.y) - geometry.gamma)) > tol:
            return False
    return True


def expected_losses(law: DiscreteLaw, spec: LossSpec, y) -> tuple:
    """``(E[u(y, X)], E[c(y, X)])`` under a discrete law."""
    E = _Expectation(law, spec)
    return E.u(y), E.c(y)
