import numpy as np
import pytest

from sparsecv.seeding import derive_seed
from sparsecv.synth import gen_design, gen_responses, gen_theta_star


class TestDeriveSeed:
    def test_deterministic(self):
        assert derive_seed(42, ["a", 1]) == derive_seed(42, ["a", 1])

    def test_empty_labels_pass_through(self):
        assert derive_seed(987654321, []) == 987654321

    def test_no_collisions_spotcheck(self):
        seen = set()
        for i in range(10_000):
            seen.add(derive_seed(0, ["cell", i]))
        assert len(seen) == 10_000

    def test_label_sensitivity(self):
        base = derive_seed(7, ["x", 0])
        assert derive_seed(7, ["x", 1]) != base
        assert derive_seed(7, ["y", 0]) != base
        assert derive_seed(8, ["x", 0]) != base


class TestGenDesign:
    def test_bit_identical(self):
        a = gen_design(20, 7, 3)
        b = gen_design(20, 7, 3)
        assert a.tobytes() == b.tobytes()

    def test_column_extension_shares_prefix(self):
        a = gen_design(15, 6, 9)
        b = gen_design(15, 16, 9)
        np.testing.assert_array_equal(a, b[:, :6])

    def test_row_extension_shares_prefix(self):
        a = gen_design(10, 4, 9)
        b = gen_design(25, 4, 9)
        np.testing.assert_array_equal(a, b[:10])

    def test_moments(self):
        x = gen_design(10_000, 4, 0)
        # Monte Carlo bound: 5 sigma of the mean/variance estimators
        assert np.all(np.abs(x.mean(axis=0)) < 5 / np.sqrt(10_000))
        assert np.all(np.abs(x.var(axis=0) - 1) < 5 * np.sqrt(2 / 10_000))

    def test_seeds_differ(self):
        assert gen_design(8, 3, 0).tobytes() != gen_design(8, 3, 1).tobytes()


class TestGenThetaStar:
    def test_unit_mode(self):
        np.testing.assert_array_equal(gen_theta_star(5, 2, "unit", 0),
                                      [1, 1, 0, 0, 0])

    def test_gaussian_mode_support(self):
        theta = gen_theta_star(30, 6, "gaussian", 4)
        np.testing.assert_array_equal(np.flatnonzero(theta), np.arange(6))

    def test_zero_deff(self):
        assert np.all(gen_theta_star(8, 0, "unit", 0) == 0)

    def test_bad_args(self):
        with pytest.raises(ValueError):
            gen_theta_star(3, 4, "unit", 0)
        with pytest.raises(ValueError):
            gen_theta_star(3, 1, "bogus", 0)


class TestGenResponses:
    def test_noiseless_linear(self):
        x = gen_design(12, 5, 2)
        theta = gen_theta_star(5, 3, "unit", 2)
        y = gen_responses(x, theta, "linear", 0.0, 2)
        np.testing.assert_array_equal(y, x @ theta)

    def test_logistic_balanced_at_zero_signal(self):
        x = gen_design(20_000, 3, 1)
        y = gen_responses(x, np.zeros(3), "logistic", seed=1)
        assert set(np.unique(y)) == {-1.0, 1.0}
        # 5 sigma Monte Carlo band around 1/2
        assert abs(np.mean(y > 0) - 0.5) < 5 * 0.5 / np.sqrt(20_000)

    def test_logistic_saturated(self):
        x = np.full((500, 1), 1.0)
        y = gen_responses(x, np.array([50.0]), "logistic", seed=3)
        assert np.mean(y == 1.0) > 0.99

    def test_order_independent_of_sigma(self):
        x = gen_design(10, 3, 5)
        theta = gen_theta_star(3, 2, "unit", 5)
        a = gen_responses(x, theta, "linear", 1.0, 5)
        b = gen_responses(x, theta, "linear", 1.0, 5)
        assert a.tobytes() == b.tobytes()
