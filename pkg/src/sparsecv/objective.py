"""Regularized objective, gradient, and restricted Hessian evaluations.

The objective is (1/N) * sum_m f(x_m^T theta, y_m) + lam * R(theta). The
divisor stays N even when one point is excluded, so that the data/penalty
balance matches the full-data problem.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .data import Dataset
from .families import loss_d1_d2, loss_value
from .regularizers import Regularizer

__all__ = [
    "objective_value",
    "objective_gradient",
    "loss_gradient",
    "restricted_hessian",
]


def _check_exclude(data: Dataset, exclude) -> None:
    if exclude is not None and not (0 <= exclude < data.n):
        raise IndexError(f"exclude={exclude} out of range [0, {data.n})")


def objective_value(data: Dataset, reg: Regularizer, theta,
                    exclude: Optional[int] = None) -> float:
    _check_exclude(data, exclude)
    theta = np.asarray(theta, dtype=float)
    z = data.matvec(theta)
    losses = loss_value(data.family, z, data.y)
    total = float(np.sum(losses))
    if exclude is not None:
        total -= float(losses[exclude])
    return total / data.n + reg.lam * reg.value(theta)


def loss_gradient(data: Dataset, theta, exclude: Optional[int] = None,
                  z: Optional[np.ndarray] = None) -> np.ndarray:
    """Gradient of the unregularized (1/N)-scaled loss sum."""
    _check_exclude(data, exclude)
    theta = np.asarray(theta, dtype=float)
    if z is None:
        z = data.matvec(theta)
    d1, _ = loss_d1_d2(data.family, z, data.y)
    if exclude is not None:
        d1 = d1.copy()
        d1[exclude] = 0.0
    return data.rmatvec(d1) / data.n


def objective_gradient(data: Dataset, reg: Regularizer, theta,
                       exclude: Optional[int] = None) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    g = loss_gradient(data, theta, exclude=exclude)
    return g + reg.lam * reg.grad(theta)


def restricted_hessian(data: Dataset, theta, s,
                       exclude: Optional[int] = None) -> np.ndarray:
    """(1/N) * sum over included rows of d2_m * x_{m,s} x_{m,s}^T.

    This is the unregularized curvature: on an l1 support the penalty
    contributes none. Indices in ``s`` must be within [0, D).
    """
    _check_exclude(data, exclude)
    s = np.asarray(s, dtype=int)
    if s.size == 0:
        raise ValueError("s must be a nonempty index set")
    if np.any(s < 0) or np.any(s >= data.d):
        raise IndexError(f"support indices out of range [0, {data.d})")
    theta = np.asarray(theta, dtype=float)
    z = data.matvec(theta)
    _, d2 = loss_d1_d2(data.family, z, data.y)
    if exclude is not None:
        d2 = d2.copy()
        d2[exclude] = 0.0
    xs = data.columns(s)
    h = (xs * d2[:, None]).T @ xs / data.n
    return 0.5 * (h + h.T)
