import numpy as np
import pytest

from sparsecv.data import Dataset
from sparsecv.objective import objective_gradient, objective_value
from sparsecv.regularizers import Regularizer
from sparsecv.solver_l1 import SolverConfig, fit_l1
from sparsecv.solver_smooth import fit_smooth
from sparsecv.synth import gen_design, gen_responses, gen_theta_star

from conftest import make_linear, make_logistic


def test_ridge_closed_form():
    data, _ = make_linear(n=80, d=10)
    lam = 0.2
    fit = fit_smooth(data, Regularizer("l2", lam),
                     SolverConfig(kkt_tol=1e-12))
    x = np.asarray(data.x)
    closed = np.linalg.solve(x.T @ x / data.n + 2 * lam * np.eye(10),
                             x.T @ data.y / data.n)
    np.testing.assert_allclose(fit.theta, closed, atol=1e-8)
    assert fit.converged


def test_unregularized_logistic_matches_gradient_descent_oracle():
    # small, well-separated-free data so the MLE exists; the oracle is a
    # long plain gradient-descent run
    data, _ = make_logistic(n=120, d=3)
    reg = Regularizer("l2", 0.0)
    fit = fit_smooth(data, reg, SolverConfig(kkt_tol=1e-10))
    theta = np.zeros(3)
    for _ in range(60_000):
        theta -= 1.0 * objective_gradient(data, reg, theta)
    np.testing.assert_allclose(fit.theta, theta, atol=1e-6)


def test_smoothed_l1_close_to_l1():
    # unit-signal linear recovery setup; eta=100 smoothing keeps the
    # optimum within the smoothing scale of the l1 optimum
    from math import log10, sqrt

    n, d = 200, 20
    x = gen_design(n, d, 3)
    theta = gen_theta_star(d, 5, "unit", 3)
    y = gen_responses(x, theta, "linear", 1.0, 3)
    data = Dataset(x, y, "linear")
    lam = 10.0 * sqrt(log10(d) / n)
    l1 = fit_l1(data, lam)
    sm = fit_smooth(data, Regularizer("smoothed-l1", lam, 100.0))
    assert sm.converged
    assert float(np.max(np.abs(sm.theta - l1.theta))) <= 0.05


def test_gradient_norm_contract():
    for seed in range(3):
        data, _ = make_logistic(n=60, d=8, seed=seed)
        cfg = SolverConfig(kkt_tol=1e-9)
        fit = fit_smooth(data, Regularizer("l2", 0.05), cfg)
        assert fit.converged
        assert fit.kkt_violation <= 1e-9


def test_rejects_l1():
    data, _ = make_linear()
    with pytest.raises(ValueError):
        fit_smooth(data, Regularizer("l1", 0.1))


def test_dual_form_matches_dense_when_d_exceeds_n():
    # D > N exercises the N x N dual Newton system
    n, d = 30, 90
    x = gen_design(n, d, 5)
    theta = gen_theta_star(d, 4, "unit", 5)
    y = gen_responses(x, theta, "logistic", seed=5)
    data = Dataset(x, y, "logistic")
    reg = Regularizer("l2", 0.1)
    cfg = SolverConfig(kkt_tol=1e-11)
    fit = fit_smooth(data, reg, cfg)
    assert fit.converged
    # dense oracle: closed Newton iterations over the explicit D x D system
    th = np.zeros(d)
    for _ in range(60):
        g = objective_gradient(data, reg, th)
        z = x @ th
        w = 1.0 / (1 + np.exp(z)) / (1 + np.exp(-z))
        h = (x * w[:, None]).T @ x / n + 2 * reg.lam * np.eye(d)
        th = th - np.linalg.solve(h, g)
    np.testing.assert_allclose(fit.theta, th, atol=1e-8)


def test_objective_never_increases():
    data, _ = make_logistic(n=50, d=6)
    reg = Regularizer("l2", 0.02)
    fit = fit_smooth(data, reg)
    base = objective_value(data, reg, fit.theta)
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert objective_value(
            data, reg, fit.theta + 1e-5 * rng.standard_normal(6)) >= base - 1e-12
