import numpy as np
import pytest

from sparsecv.data import Dataset
from sparsecv.synth import gen_design, gen_responses, gen_theta_star


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def make_linear(n=60, d=8, deff=3, seed=0, noise=1.0):
    x = gen_design(n, d, seed)
    theta = gen_theta_star(d, deff, "unit", seed)
    y = gen_responses(x, theta, "linear", noise, seed)
    return Dataset(x, y, "linear"), theta


def make_logistic(n=80, d=6, deff=3, seed=0):
    x = gen_design(n, d, seed)
    theta = gen_theta_star(d, deff, "unit", seed)
    y = gen_responses(x, theta, "logistic", seed=seed)
    return Dataset(x, y, "logistic"), theta
