import math

import numpy as np
import pytest

from sparsecv.audit import (
    AuditInput,
    beta_min_margin,
    bounded_gradient_stat,
    check_condition1,
    incoherence_norm,
    jnd_loo,
    lambda_small_ok,
    lambda_threshold,
    lssc_constant,
    max_jnd_norm,
    min_eig_loo,
    run_audit,
)
from sparsecv.data import Dataset
from sparsecv.errors import AlphaExceededError
from sparsecv.exact_cv import fit_model
from sparsecv.regularizers import Regularizer
from sparsecv.solver_l1 import SolverConfig, support_of
from sparsecv.synth import gen_design, gen_responses, gen_theta_star

from conftest import make_linear


def spreadsheet_mj_lin(n, d, deff, c_x, big_c):
    """Term-by-term independent transcription of the linear M_J formula."""
    if deff == 0 or d - deff < 1:
        return 0.0
    cx2, cx4 = c_x**2, c_x**4
    den = n - 3 * cx2 * math.sqrt(n) * (math.sqrt(deff) + 5)
    t1 = big_c * deff
    t1 *= math.sqrt(50 * cx2) + math.sqrt(2 * cx2 * math.log(n * (d - deff)))
    t1 *= (math.sqrt(deff) + math.sqrt(50 * cx4)
           + math.sqrt(2 * cx4 * math.log(n)))
    t1 /= den
    t2 = big_c * deff * (deff + deff * cx2 * (math.log(n) + 26))
    t2 *= (math.sqrt(n) + math.sqrt(50 * cx4)
           + math.sqrt(2 * cx4 * math.log(d - deff)))
    t2 *= math.sqrt(n * deff) + math.sqrt(50 * cx4)
    t2 /= den**2
    return t1 + t2


def spreadsheet_threshold_lin(n, d, deff, alpha, c_x, c_eps, big_c):
    mj = spreadsheet_mj_lin(n, d, deff, c_x, big_c)
    cx2, ce2 = c_x**2, c_eps**2
    inner = (cx2 * ce2 * math.log(d) / (n * big_c)
             + 25 * cx2 * ce2 / (n * big_c))
    tail = 4 * c_x * c_eps * (math.log(n * d) + 26) / n
    return (math.sqrt(inner) + tail) / (alpha - mj), mj


def spreadsheet_mj_logr(n, d, deff, c_x, l_min, big_c):
    if deff == 0 or d - deff < 1:
        return 0.0
    cx2, cx4 = c_x**2, c_x**4
    den = l_min - cx2 * math.sqrt(n) * (math.sqrt(deff) + 5)
    t1 = big_c * deff
    t1 *= math.sqrt(50 * cx2) + math.sqrt(2 * cx2 * math.log(n * (d - deff)))
    t1 *= (math.sqrt(deff) + math.sqrt(50 * cx4)
           + math.sqrt(2 * cx4 * math.log(n)))
    t1 /= den
    t2 = big_c * deff * (deff + deff * cx2 * (math.log(n) + 26))
    t2 *= (math.sqrt(n) + math.sqrt(50 * cx4)
           + math.sqrt(2 * cx4 * math.log(d - deff)))
    t2 *= math.sqrt(n * deff) + math.sqrt(50 * cx4)
    t2 /= den**2
    return t1 + t2


def spreadsheet_threshold_logr(n, d, deff, alpha, c_x, l_min, big_c):
    mj = spreadsheet_mj_logr(n, d, deff, c_x, l_min, big_c)
    cx2 = c_x**2
    bracket = (math.sqrt(cx2 * (25 + math.log(d)) / n)
               + (math.sqrt(2 * cx2 * math.log(n * d))
                  + math.sqrt(50 * cx2)) / n)
    return big_c * bracket / (alpha - mj), mj


class TestIncoherence:
    def test_orthogonal_design_is_zero(self):
        x = np.kron(np.eye(4), np.ones((5, 1)))  # disjoint column supports
        y = np.zeros(20)
        data = Dataset(x, y, "linear")
        assert incoherence_norm(data, np.zeros(4), [0, 1]) == 0.0

    def test_duplicated_column_gives_one(self, rng):
        base = rng.standard_normal((30, 3))
        x = np.column_stack([base, base[:, 0]])  # col 3 duplicates col 0
        data = Dataset(x, np.zeros(30), "linear")
        got = incoherence_norm(data, np.zeros(4), [0, 1, 2])
        assert got == pytest.approx(1.0, abs=1e-8)

    def test_gaussian_design_below_one(self):
        x = gen_design(500, 100, 0)
        data = Dataset(x, np.zeros(500), "linear")
        val = incoherence_norm(data, np.zeros(100), np.arange(5))
        assert 0 < val < 1


class TestJnd:
    def test_orthogonal_is_zero(self):
        x = np.kron(np.eye(3), np.ones((4, 1)))
        data = Dataset(x, np.zeros(12), "linear")
        vec, norm1 = jnd_loo(data, [0], 5, 2)
        np.testing.assert_allclose(vec, 0.0, atol=1e-12)
        assert norm1 == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_row_removal_matches_full(self, rng):
        base = rng.standard_normal((20, 4))
        extra = np.zeros((1, 4))
        extra[0, 0] = 1e-300  # effectively orthogonal to every column pair
        x = np.vstack([base, np.zeros((1, 4))])
        x[20] = 0.0
        data = Dataset(x[:, :4], np.zeros(21), "linear")
        vec_loo, _ = jnd_loo(data, [0, 1], 20, 3)
        xs = base[:, [0, 1]]
        full = np.linalg.solve(xs.T @ xs, xs.T @ base[:, 3])
        np.testing.assert_allclose(vec_loo, full, atol=1e-10)

    def test_max_below_one_on_recovery_design(self):
        x = gen_design(400, 40, 1)
        data = Dataset(x, np.zeros(400), "linear")
        assert max_jnd_norm(data, np.arange(5)) < 1.0


class TestMinEig:
    def test_matches_dense_eigensolver(self, rng):
        x = rng.standard_normal((50, 8))
        y = rng.standard_normal(50)
        data = Dataset(x, y, "linear")
        s = np.array([0, 3, 6])
        got = min_eig_loo(data, np.zeros(8), s)
        xs = x[:, s]
        g = xs.T @ xs
        expected = min(
            float(np.linalg.eigvalsh(g - np.outer(xs[m], xs[m]))[0])
            for m in range(50))
        assert got == pytest.approx(expected, rel=1e-10)

    def test_rank_one_lower_bound(self, rng):
        for seed in range(5):
            x = np.random.default_rng(seed).standard_normal((40, 6))
            data = Dataset(x, np.zeros(40), "linear")
            s = np.arange(3)
            got = min_eig_loo(data, np.zeros(6), s)
            xs = x[:, s]
            bound = (float(np.linalg.eigvalsh(xs.T @ xs)[0])
                     - float(np.max(np.sum(xs**2, axis=1))))
            assert got >= bound - 1e-10

    def test_scaled_orthonormal_design(self):
        n = 36
        q = np.linalg.qr(np.random.default_rng(2).standard_normal((n, 3)))[0]
        x = q * np.sqrt(n)
        data = Dataset(x, np.zeros(n), "linear")
        got = min_eig_loo(data, np.zeros(3), np.arange(3))
        bound = n - float(np.max(np.sum(x**2, axis=1)))
        assert got >= bound - 1e-9


class TestBoundedGradient:
    def test_noiseless_linear_is_zero(self):
        data, theta = make_linear(n=30, d=5, noise=0.0)
        worst, ok = bounded_gradient_stat(data, theta, gamma=0.5, lam=0.1)
        assert worst == pytest.approx(0.0, abs=1e-14)
        assert ok

    def test_lambda_zero_needs_exact_zero(self):
        data, theta = make_linear(n=30, d=5, noise=1.0)
        worst, ok = bounded_gradient_stat(data, theta, gamma=0.5, lam=0.0)
        assert worst > 0 and not ok

    def test_matches_bruteforce(self, rng):
        data, theta = make_linear(n=25, d=6, noise=1.0)
        worst, _ = bounded_gradient_stat(data, theta, 0.5, 0.1)
        x, y = np.asarray(data.x), data.y
        r = x @ theta - y
        brute = max(
            float(np.max(np.abs(
                (x.T @ r - r[m] * x[m]) / 25)))
            for m in range(25))
        assert worst == pytest.approx(brute, rel=1e-12)


class TestLsscAndLambdaSmall:
    def test_linear_is_zero(self):
        data, _ = make_linear()
        assert lssc_constant(data, [0, 1], "linear") == 0.0

    def test_logistic_single_row(self):
        data = Dataset(np.array([[2.0, 1.0]]), np.array([1.0]), "logistic")
        assert lssc_constant(data, [0], "logistic") == pytest.approx(2.0)

    def test_logistic_matches_raw_maxima(self, rng):
        x = rng.standard_normal((40, 7))
        y = np.where(rng.random(40) < 0.5, 1.0, -1.0)
        data = Dataset(x, y, "logistic")
        s = np.array([1, 4])
        got = lssc_constant(data, s, "logistic")
        expected = 0.25 * np.max(np.abs(x)) * np.max(np.sum(x[:, s]**2,
                                                            axis=1))
        assert got == pytest.approx(expected, rel=1e-12)

    def test_lambda_small_rule(self):
        assert lambda_small_ok(0.0, 1.0, 0.5, 5, 1e9)
        # worked arithmetic case: bound = 100*0.5/(4*20.25*5) = 0.12345679...
        assert lambda_small_ok(1.0, 10.0, 0.5, 5, 0.1)
        assert not lambda_small_ok(1.0, 10.0, 0.5, 5, 0.124)
        assert lambda_small_ok(1.0, 10.0, 0.5, 5, 0.1234567)


class TestLambdaThreshold:
    def test_matches_spreadsheet_linear(self, rng):
        checked = 0
        while checked < 20:
            n = int(rng.integers(20_000, 500_000))
            d = int(rng.integers(50, 5000))
            deff = int(rng.integers(1, 10))
            c_x = float(rng.uniform(0.3, 1.2))
            c_eps = float(rng.uniform(0.3, 2.0))
            big_c = float(rng.uniform(0.1, 2.0))
            alpha = 0.9
            expected, mj_exp = spreadsheet_threshold_lin(
                n, d, deff, alpha, c_x, c_eps, big_c)
            if mj_exp >= alpha:
                continue
            got, mj = lambda_threshold("linear", n, d, deff, alpha, c_x,
                                       c_eps=c_eps, big_c=big_c)
            assert mj == pytest.approx(mj_exp, rel=1e-12)
            assert got == pytest.approx(expected, rel=1e-12)
            checked += 1

    def test_matches_spreadsheet_logistic(self, rng):
        checked = 0
        while checked < 20:
            n = int(rng.integers(20_000, 300_000))
            d = int(rng.integers(50, 2000))
            deff = int(rng.integers(1, 8))
            c_x = float(rng.uniform(0.3, 1.0))
            l_min = float(n * rng.uniform(0.5, 1.0))
            big_c = float(rng.uniform(0.1, 1.5))
            alpha = 0.9
            expected, mj_exp = spreadsheet_threshold_logr(
                n, d, deff, alpha, c_x, l_min, big_c)
            if mj_exp >= alpha:
                continue
            got, mj = lambda_threshold("logistic", n, d, deff, alpha, c_x,
                                       l_min=l_min, big_c=big_c)
            assert mj == pytest.approx(mj_exp, rel=1e-12)
            assert got == pytest.approx(expected, rel=1e-12)
            checked += 1

    def test_mj_decreases_with_n(self):
        mjs = []
        for n in (20_000, 50_000, 100_000, 300_000, 1_000_000):
            _, mj = lambda_threshold("linear", n, 10_000, 5, 0.9, 1.0,
                                     c_eps=1.0)
            mjs.append(mj)
        assert all(a > b for a, b in zip(mjs, mjs[1:]))
        assert mjs[-1] < 0.1 * mjs[0]

    def test_deff_zero_gives_zero_mj(self):
        thr, mj = lambda_threshold("linear", 1000, 50, 0, 0.5, 1.0,
                                   c_eps=1.0)
        assert mj == 0.0 and thr > 0

    def test_alpha_exceeded(self):
        with pytest.raises(AlphaExceededError) as exc:
            lambda_threshold("linear", 600, 5000, 8, 0.05, 1.0, c_eps=1.0)
        assert exc.value.mj is not None and exc.value.mj >= 0.05


class TestBetaMin:
    def test_hand_case(self):
        theta = np.array([1.0, 1.0, 0.0])
        # rhs = sqrt(2)*(g+4)*lam/L = 0.3 for these numbers
        lam = 0.3 * 10.0 / (np.sqrt(2) * 4.5)
        got = beta_min_margin(theta, [0, 1], gamma=0.5, l_min=10.0, deff=2,
                              lam=lam)
        assert got == pytest.approx(0.7, rel=1e-12)

    def test_lambda_zero(self):
        theta = np.array([0.4, -2.0])
        got = beta_min_margin(theta, [0, 1], 0.5, 5.0, 2, 0.0)
        assert got == pytest.approx(0.4)

    def test_app_f_setup_positive(self):
        # unit signal, recovery-regime lambda, measured curvature scale
        from math import log10, sqrt

        n, d = 1000, 100
        x = gen_design(n, d, 0)
        theta = gen_theta_star(d, 5, "unit", 0)
        y = gen_responses(x, theta, "linear", 1.0, 0)
        data = Dataset(x, y, "linear")
        lam = 10 * sqrt(log10(d) / n)
        s = np.arange(5)
        gamma = 1.0 - max_jnd_norm(data, s)
        l_min = min_eig_loo(data, theta, s)
        assert beta_min_margin(theta, s, gamma, l_min, 5, lam) > 0


class TestCondition1:
    def test_single_fold_trivially_true(self):
        data = Dataset(np.array([[1.0, 2.0]]), np.array([1.0]), "linear")
        reg = Regularizer("l1", 0.1)
        fit = fit_model(data, reg)
        holds, supports = check_condition1(data, reg, fit)
        assert holds and 0 in supports

    def test_recovery_lambda_stable(self):
        from math import log10, sqrt

        n, d = 400, 40
        x = gen_design(n, d, 21)
        theta = gen_theta_star(d, 5, "unit", 21)
        y = gen_responses(x, theta, "linear", 1.0, 21)
        data = Dataset(x, y, "linear")
        lam = 10 * sqrt(log10(d) / n)
        reg = Regularizer("l1", lam)
        fit = fit_model(data, reg)
        holds, supports = check_condition1(data, reg, fit)
        assert holds
        assert fit.support.size == 5
        assert all(len(v["exact"]) == 5 for v in supports.values())

    def test_small_lambda_unstable(self):
        from math import log10, sqrt

        n, d = 200, 40
        x = gen_design(n, d, 3)
        theta = gen_theta_star(d, 5, "unit", 3)
        y = gen_responses(x, theta, "linear", 1.0, 3)
        data = Dataset(x, y, "linear")
        lam = 1.0 * sqrt(log10(d) / n)
        reg = Regularizer("l1", lam)
        fit = fit_model(data, reg)
        holds, _ = check_condition1(data, reg, fit)
        assert not holds


def test_run_audit_end_to_end():
    n, d = 300, 40
    x = gen_design(n, d, 2)
    theta = gen_theta_star(d, 5, "unit", 2)
    y = gen_responses(x, theta, "linear", 1.0, 2)
    data = Dataset(x, y, "linear")
    inp = AuditInput(data=data, theta_star=theta, s=support_of(theta),
                     lam=0.4, alpha=0.5)
    report = run_audit(inp, SolverConfig(), include_condition1=True)
    assert report.incoherence_norm is not None
    assert report.max_jnd_norm is not None and report.max_jnd_norm < 1
    assert report.gamma_empirical == pytest.approx(1 - report.max_jnd_norm)
    assert report.lssc_k == 0.0
    assert report.lambda_small_ok is True
    assert report.min_eig_loo > 0
    assert report.lmin_over_n == pytest.approx(report.min_eig_loo / n)
    assert report.condition1_holds is not None
    assert report.mj is not None
