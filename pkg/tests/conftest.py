import numpy as np
import pytest

from mha import DecisionSet, LossSpec, ProblemGeometry, make_loss_spec
from mha.saddle import EmpiricalObjective


def quad_spec():
    """u = (y - x)^2, c = y^2 in one dimension."""
    return make_loss_spec("quadratic_tracking", "ridge_constraint")


def scalar_spec(u, c, grad_u=None, grad_c=None):
    """LossSpec from scalar formulas ``f(y, x)`` with ``y, x`` floats."""
    def vec(f):
        return lambda y, X: np.array([f(y[0], row[0]) for row in X])

    def vecg(g):
        return None if g is None else (lambda y, X: np.array([[g(y[0], row[0])] for row in X]))

    return LossSpec(u=vec(u), c=vec(c), grad_u=vecg(grad_u), grad_c=vecg(grad_c))


def box_geometry(lo=-1.0, hi=1.0, gamma=1.0, lambda_max=10.0, D=1.0, d=1):
    return ProblemGeometry(d=d, D=D, decision_set=DecisionSet.box([lo], [hi]),
                           lambda_max=lambda_max, gamma=gamma)


@pytest.fixture
def geom1():
    return box_geometry()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# closed-form 1-d losses used by the brute-force oracle
U_FORMS = {
    "sq": (lambda y, x: (y - x) ** 2, lambda y, x: 2 * (y - x)),
    "quart": (lambda y, x: (y - x) ** 4 + 0.1 * (y - x) ** 2,
              lambda y, x: 4 * (y - x) ** 3 + 0.2 * (y - x)),
    "lin": (lambda y, x: x * y, lambda y, x: x + 0 * y),
}
C_FORMS = {
    "ridge": (lambda y, x: y * y + 0 * x, lambda y, x: 2 * y + 0 * x),
    "track": (lambda y, x: (y - x) ** 2, lambda y, x: 2 * (y - x)),
    "lin": (lambda y, x: y + 0 * x, lambda y, x: 1 + 0 * (y + x)),
}


def grid_saddle(xs, u, c, gamma, rho, lo, hi, lmax, step=1e-3):
    """Brute-force (y, lambda) saddle of the regularized sample Lagrangian on a grid."""
    ys = np.arange(lo, hi + step / 2, step)
    lams = np.arange(0.0, lmax + step / 2, step)
    ubar = np.mean([u(ys, x) for x in xs], axis=0)
    cbar = np.mean([c(ys, x) for x in xs], axis=0)
    # L[i, j] = objective at (ys[i], lams[j])
    L = (ubar + rho * ys**2)[:, None] + lams[None, :] * (cbar - gamma)[:, None] \
        - rho * lams[None, :] ** 2
    y_hat = ys[np.argmin(L.max(axis=1))]
    lam_hat = lams[np.argmax(L.min(axis=0))]
    return y_hat, lam_hat


def grid_minimax_value(xs, probs, u, c, gamma, lo, hi, lmax, step=1e-3):
    """``min_y max_lam E[u] + lam (E[c] - gamma)`` over a (y, lambda) grid."""
    ys = np.arange(lo, hi + step / 2, step)
    lams = np.arange(0.0, lmax + step / 2, step)
    ubar = sum(p * u(ys, x) for x, p in zip(xs, probs))
    cbar = sum(p * c(ys, x) for x, p in zip(xs, probs))
    L = ubar[:, None] + lams[None, :] * (cbar - gamma)[:, None]
    return float(L.max(axis=1).min())


def make_obj_1d(xs, uname, cname, gamma, rho, lo=-1.0, hi=1.0, lmax=10.0):
    spec = scalar_spec(U_FORMS[uname][0], C_FORMS[cname][0], U_FORMS[uname][1], C_FORMS[cname][1])
    geom = box_geometry(lo, hi, gamma=gamma, lambda_max=lmax)
    return EmpiricalObjective(np.reshape(xs, (-1, 1)), spec, geom, rho)
