import numpy as np
import pytest
import scipy.sparse as sp

from sparsecv.data import Dataset
from sparsecv.errors import NonDifferentiableRegularizerError
from sparsecv.objective import (
    objective_gradient,
    objective_value,
    restricted_hessian,
)
from sparsecv.regularizers import Regularizer

from conftest import make_linear, make_logistic


class TestObjectiveValue:
    def test_ols_optimum_value(self):
        # at lam=0 the optimum equals the residual sum over 2N, with the
        # optimum itself taken from a direct least-squares solve
        data, _ = make_linear(n=50, d=6)
        x, y = np.asarray(data.x), data.y
        theta_ols = np.linalg.lstsq(x, y, rcond=None)[0]
        expected = float(np.sum((x @ theta_ols - y) ** 2)) / (2 * data.n)
        got = objective_value(data, Regularizer("l1", 0.0), theta_ols)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_exclude_consistency(self, rng):
        data, _ = make_logistic(n=30, d=5)
        reg = Regularizer("l2", 0.3)
        theta = rng.standard_normal(5)
        full = objective_value(data, reg, theta)
        z = data.matvec(theta)
        for n in (0, 13, 29):
            part = objective_value(data, reg, theta, exclude=n)
            loss_n = np.logaddexp(0.0, -data.y[n] * z[n]) / data.n
            assert part + loss_n == pytest.approx(full, rel=1e-12)

    def test_zero_loss_point_changes_nothing(self):
        data, theta = make_linear(n=20, d=4, noise=0.0)
        # residuals vanish at theta*, so excluding any point keeps the value
        reg = Regularizer("l1", 0.7)
        assert objective_value(data, reg, theta, exclude=3) == pytest.approx(
            objective_value(data, reg, theta), rel=1e-12)

    def test_theta_zero_linear(self):
        data, _ = make_linear(n=25, d=4)
        base = float(data.y @ data.y) / (2 * data.n)
        assert objective_value(data, Regularizer("l1", 2.0), np.zeros(4)) \
            == pytest.approx(base, rel=1e-12)
        assert objective_value(data, Regularizer("l2", 2.0), np.zeros(4)) \
            == pytest.approx(base, rel=1e-12)
        # smoothed l1 contributes its additive constant at zero
        sm = objective_value(data, Regularizer("smoothed-l1", 2.0, 100.0),
                             np.zeros(4))
        assert sm == pytest.approx(base + 2.0 * 2 * np.log(2) * 4 / 100.0,
                                   rel=1e-12)

    def test_exclude_out_of_range(self):
        data, _ = make_linear(n=10, d=3)
        with pytest.raises(IndexError):
            objective_value(data, Regularizer("l2", 0.1), np.zeros(3),
                            exclude=10)


class TestObjectiveGradient:
    def test_theta_zero_l2_linear(self):
        data, _ = make_linear(n=40, d=5)
        g = objective_gradient(data, Regularizer("l2", 0.4), np.zeros(5))
        expected = -data.rmatvec(data.y) / data.n
        np.testing.assert_allclose(g, expected, rtol=1e-12)

    def test_l1_gradient_rejected(self):
        data, _ = make_linear()
        with pytest.raises(NonDifferentiableRegularizerError):
            objective_gradient(data, Regularizer("l1", 0.1), np.zeros(8))

    @pytest.mark.parametrize("family,reg", [
        ("linear", Regularizer("l2", 0.2)),
        ("logistic", Regularizer("l2", 0.2)),
        ("logistic", Regularizer("smoothed-l1", 0.2, 100.0)),
    ])
    def test_matches_finite_differences(self, family, reg, rng):
        data, _ = (make_linear(n=30, d=5) if family == "linear"
                   else make_logistic(n=30, d=5))
        h = 1e-5
        for _ in range(10):
            theta = rng.uniform(-0.4, 0.4, size=5)
            grad = objective_gradient(data, reg, theta)
            for j in range(5):
                e = np.zeros(5)
                e[j] = h
                fd = (objective_value(data, reg, theta + e)
                      - objective_value(data, reg, theta - e)) / (2 * h)
                assert grad[j] == pytest.approx(fd, rel=1e-5, abs=1e-8)

    def test_exclude_subtracts_point_term(self, rng):
        data, _ = make_logistic(n=25, d=4)
        reg = Regularizer("l2", 0.15)
        theta = rng.standard_normal(4)
        full = objective_gradient(data, reg, theta)
        z = float(data.row(7) @ theta)
        d1 = -data.y[7] / (1.0 + np.exp(data.y[7] * z))
        part = objective_gradient(data, reg, theta, exclude=7)
        np.testing.assert_allclose(part, full - d1 * data.row(7) / data.n,
                                   rtol=1e-10, atol=1e-14)


class TestRestrictedHessian:
    def test_linear_full_support(self):
        data, _ = make_linear(n=30, d=5)
        h = restricted_hessian(data, np.zeros(5), np.arange(5))
        x = np.asarray(data.x)
        np.testing.assert_allclose(h, x.T @ x / data.n, rtol=1e-12)

    def test_exclude_rank_one_identity(self, rng):
        data, _ = make_logistic(n=20, d=6)
        theta = rng.standard_normal(6)
        s = np.array([0, 2, 5])
        full = restricted_hessian(data, theta, s)
        part = restricted_hessian(data, theta, s, exclude=4)
        z = float(data.row(4) @ theta)
        d2 = 1.0 / (1 + np.exp(z)) / (1 + np.exp(-z))
        xs = data.row(4)[s]
        np.testing.assert_allclose(part, full - d2 * np.outer(xs, xs) / data.n,
                                   rtol=1e-10, atol=1e-15)

    def test_logistic_at_zero(self):
        data, _ = make_logistic(n=40, d=5)
        h = restricted_hessian(data, np.zeros(5), np.arange(5))
        x = np.asarray(data.x)
        np.testing.assert_allclose(h, x.T @ x / (4 * data.n), rtol=1e-12)

    def test_psd_and_index_checks(self, rng):
        data, _ = make_logistic(n=25, d=6)
        h = restricted_hessian(data, rng.standard_normal(6), [1, 3])
        assert np.min(np.linalg.eigvalsh(h)) >= -1e-12
        with pytest.raises(IndexError):
            restricted_hessian(data, np.zeros(6), [7])
        with pytest.raises(ValueError):
            restricted_hessian(data, np.zeros(6), [])


def test_sparse_dense_agree(rng):
    x = rng.standard_normal((30, 10))
    x[rng.random((30, 10)) < 0.8] = 0.0
    y = np.where(rng.random(30) < 0.5, 1.0, -1.0)
    dense = Dataset(x, y, "logistic")
    sparse = Dataset(sp.csc_array(x), y, "logistic")
    assert sparse.is_sparse
    theta = rng.standard_normal(10)
    reg = Regularizer("l2", 0.2)
    assert objective_value(dense, reg, theta) == pytest.approx(
        objective_value(sparse, reg, theta), rel=1e-14)
    np.testing.assert_allclose(objective_gradient(dense, reg, theta),
                               objective_gradient(sparse, reg, theta),
                               rtol=1e-12)


def test_dense_densification_rule(rng):
    x = rng.standard_normal((20, 5))      # fully dense values
    y = rng.standard_normal(20)
    data = Dataset(sp.csc_array(x), y, "linear")
    assert not data.is_sparse              # density > 25% densifies
