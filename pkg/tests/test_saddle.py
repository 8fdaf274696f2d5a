import numpy as np
import pytest

from mha import DecisionSet, LossSpecError, ProblemGeometry
from mha.saddle import (EmpiricalObjective, default_prediction, inner_lambda, projected_gradient,
                        solve_saddle)

from conftest import (C_FORMS, U_FORMS, box_geometry, grid_saddle, make_obj_1d, quad_spec,
                      scalar_spec)

def test_inner_lambda_examples():
    def obj(slack, rho, lmax=10.0):
        # c(y, x) = x so the sample mean of c is the sample mean of x
        spec = scalar_spec(lambda y, x: 0.0, lambda y, x: x)
        geom = box_geometry(gamma=0.0, lambda_max=lmax)
        return EmpiricalObjective([[slack]], spec, geom, rho)

    assert inner_lambda([0.0], obj(0.0, 0.1)) == 0.0
    assert inner_lambda([0.0], obj(1.0, 0.5)) == pytest.approx(1.0)
    assert inner_lambda([0.0], obj(100.0, 0.1)) == 10.0
    # rho = 0 endpoint rule with the tie at zero slack going to 0
    assert inner_lambda([0.0], obj(0.3, 0.0)) == 10.0
    assert inner_lambda([0.0], obj(-0.3, 0.0)) == 0.0
    assert inner_lambda([0.0], obj(0.0, 0.0)) == 0.0


def test_solve_saddle_active_constraint_kkt():
    obj = make_obj_1d([0.3], "sq", "lin", gamma=0.5, rho=1e-6, lo=0.0, hi=1.0)
    # (y - 1)^2 with the sample point ignored: use x = 1 in the tracking loss
    obj = make_obj_1d([1.0], "sq", "lin", gamma=0.5, rho=1e-6, lo=0.0, hi=1.0)
    sp = solve_saddle(obj)
    assert sp.success
    assert sp.y_star[0] == pytest.approx(0.5, abs=1e-2)
    assert sp.lambda_star == pytest.approx(1.0, abs=1e-2)
    y_hat, lam_hat = grid_saddle([1.0], U_FORMS["sq"][0], C_FORMS["lin"][0], 0.5, 1e-6, 0, 1, 10)
    assert abs(y_hat - 0.5) <= 1e-2 and abs(lam_hat - 1.0) <= 1e-2
    assert abs(sp.y_star[0] - y_hat) <= 1e-2 and abs(sp.lambda_star - lam_hat) <= 1e-2


def test_solve_saddle_inactive_constraint():
    spec = scalar_spec(lambda y, x: y * y, lambda y, x: -1.0, lambda y, x: 2 * y, lambda y, x: 0.0)
    obj = EmpiricalObjective([[0.2], [0.7]], spec, box_geometry(gamma=0.0), 0.01)
    sp = solve_saddle(obj, y_init=[0.8])
    assert sp.y_star[0] == pytest.approx(0.0, abs=1e-6)
    assert sp.lambda_star == 0.0


def test_solve_saddle_symmetric_sample():
    obj = make_obj_1d([-0.7, 0.7], "sq", "ridge", gamma=5.0, rho=0.01)
    sp = solve_saddle(obj, y_init=[0.9])
    assert sp.y_star[0] == pytest.approx(0.0, abs=1e-6)
    assert sp.lambda_star == 0.0


def test_default_prediction():
    y0, l0 = default_prediction(ProblemGeometry(1, 1.0, DecisionSet.box([0, 0], [1, 1]), 1.0, 0.0))
    assert np.array_equal(y0, [0, 0]) and l0 == 0.0
    y0, l0 = default_prediction(ProblemGeometry(1, 1.0, DecisionSet.simplex(3), 1.0, 0.0))
    assert np.allclose(y0, [1 / 3] * 3) and l0 == 0.0
    y0, l0 = default_prediction(box_geometry())
    assert np.array_equal(y0, [0.0]) and l0 == 0.0


def random_instance(rng):
    xs = rng.uniform(-1, 1, int(rng.integers(1, 11)))
    uname = rng.choice(list(U_FORMS))
    cname = rng.choice(list(C_FORMS))
    gamma = float(rng.uniform(0.0, 0.6))
    rho = float(rng.uniform(0.05, 1.0))
    return xs, str(uname), str(cname), gamma, rho


def test_matches_grid_search_on_random_instances():
    rng = np.random.default_rng(20)
    for _ in range(20):
        xs, uname, cname, gamma, rho = random_instance(rng)
        obj = make_obj_1d(xs, uname, cname, gamma, rho, lmax=3.0)
        sp = solve_saddle(obj)
        y_hat, lam_hat = grid_saddle(xs, U_FORMS[uname][0], C_FORMS[cname][0], gamma, rho,
                                     -1.0, 1.0, 3.0)
        assert abs(sp.y_star[0] - y_hat) <= 5e-3, (uname, cname)
        assert abs(sp.lambda_star - lam_hat) <= 5e-3, (uname, cname)


def test_saddle_property_under_perturbation(rng):
    tol = 1e-6
    for _ in range(20):
        xs, uname, cname, gamma, rho = random_instance(rng)
        obj = make_obj_1d(xs, uname, cname, gamma, rho, lmax=3.0)
        sp = solve_saddle(obj, tol=tol)
        y, lam = sp.y_star, sp.lambda_star
        g0 = obj.value(y)
        for s in (-1e-3, 1e-3):
            z = obj.geometry.decision_set.project(y + s)
            assert obj.value(z) >= g0 - tol
            l2 = min(max(lam + s, 0.0), obj.lambda_max)
            assert obj.objective(y, l2) <= obj.objective(y, lam) + tol


def test_envelope_gradient_matches_finite_differences(rng):
    checked = 0
    while checked < 30:
        xs, uname, cname, gamma, rho = random_instance(rng)
        obj = make_obj_1d(xs, uname, cname, gamma, rho, lmax=3.0)
        y = rng.uniform(-0.9, 0.9, 1)
        slack = obj.mean_constraint(y) - gamma
        lam_raw = slack / (2 * rho)
        if min(abs(lam_raw), abs(lam_raw - 3.0)) < 1e-2:
            continue  # too close to a clamp kink
        h = 1e-6
        fd = (obj.value(y + h) - obj.value(y - h)) / (2 * h)
        g = obj.grad(y)[0]
        assert abs(g - fd) <= 1e-4 * max(abs(fd), 1e-2)
        checked += 1


def test_regularization_continuity():
    # unregularized saddle: y* = 0.4, lambda* = 0.4
    xs = [0.2, 0.6, 1.0]
    errs = []
    y_prev = None
    for j in range(1, 16):
        obj = make_obj_1d(xs, "sq", "lin", gamma=0.4, rho=0.5**j, lo=0.0, hi=1.0, lmax=5.0)
        sp = solve_saddle(obj, tol=1e-10, y_init=y_prev)
        y_prev = sp.y_star
        errs.append(max(abs(sp.y_star[0] - 0.4), abs(sp.lambda_star - 0.4)))
    assert all(b <= a + 1e-9 for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-3


def test_non_finite_gradient_raises():
    spec = scalar_spec(lambda y, x: y * y, lambda y, x: 0.0,
                       lambda y, x: float("nan"), lambda y, x: 0.0)
    obj = EmpiricalObjective([[0.1]], spec, box_geometry(), 0.1)
    with pytest.raises(LossSpecError):
        solve_saddle(obj, y_init=[0.5])


def test_max_iters_reports_failure():
    obj = make_obj_1d([0.9], "quart", "ridge", gamma=1.0, rho=0.05)
    sp = solve_saddle(obj, max_iters=1, tol=1e-14)
    assert not sp.success
    assert obj.geometry.decision_set.contains(sp.y_star)


def test_projected_gradient_on_simplex():
    target = np.array([0.7, 0.6, -0.2])
    y, f, it, res, ok = projected_gradient(
        lambda y: float((y - target) @ (y - target)), lambda y: 2 * (y - target),
        DecisionSet.simplex(3).project, np.ones(3) / 3, tol=1e-12)
    assert ok
    assert np.allclose(y, DecisionSet.simplex(3).project(target), atol=1e-8)


def test_weighted_sample_equals_repeated_sample():
    spec = quad_spec()
    geom = box_geometry(gamma=0.1)
    a = solve_saddle(EmpiricalObjective([[0.5], [0.5], [0.5], [-0.2]], spec, geom, 0.2))
    b = solve_saddle(EmpiricalObjective([[0.5], [-0.2]], spec, geom, 0.2, weights=[3, 1]))
    assert np.allclose(a.y_star, b.y_star, atol=1e-9)
    assert a.lambda_star == pytest.approx(b.lambda_star, abs=1e-9)
