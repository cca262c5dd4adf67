"""Reproducible synthetic data matching the experimental setups.

Designs use counter-based (Philox) streams keyed per (seed, column), so
the same (seed, n, d) cell is bit-identical regardless of how much of the
matrix is materialized: widening D appends columns and growing N extends
each column stream.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from .families import GlmFamily
from .seeding import derive_seed

__all__ = ["gen_design", "gen_theta_star", "gen_responses"]


def _keyed_rng(seed: int, labels) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=derive_seed(seed, labels)))


def gen_design(n: int, d: int, seed: int) -> np.ndarray:
    """N x D matrix of i.i.d. standard normals."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    x = np.empty((n, d), order="F")
    for j in range(d):
        x[:, j] = _keyed_rng(seed, ["design", j]).standard_normal(n)
    return np.ascontiguousarray(x)


def gen_theta_star(d: int, deff: int, mode: str = "unit",
                   seed: int = 0) -> np.ndarray:
    """Ground-truth parameter supported on the first ``deff`` coordinates."""
    if not (0 <= deff <= d):
        raise ValueError(f"deff={deff} must be in [0, d={d}]")
    theta = np.zeros(d)
    if mode == "unit":
        theta[:deff] = 1.0
    elif mode == "gaussian":
        rng = _keyed_rng(seed, ["theta-star"])
        draws = rng.standard_normal(deff)
        while np.any(draws == 0.0):
            redo = draws == 0.0
            draws[redo] = rng.standard_normal(int(np.sum(redo)))
        theta[:deff] = draws
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return theta


def gen_responses(x: np.ndarray, theta_star: np.ndarray, family,
                  noise_sigma: float = 1.0, seed: int = 0) -> np.ndarray:
    """Responses from the linear-Gaussian or logistic-sigmoid model."""
    family = GlmFamily.parse(family)
    z = np.asarray(x) @ np.asarray(theta_star, dtype=float)
    rng = _keyed_rng(seed, ["responses"])
    if family is GlmFamily.LINEAR:
        if noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        return z + noise_sigma * rng.standard_normal(z.shape[0])
    return np.where(rng.random(z.shape[0]) < expit(z), 1.0, -1.0)
