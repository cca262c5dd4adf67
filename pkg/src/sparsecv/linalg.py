"""Reusable Hessian factorizations.

Two interchangeable representations of H = (1/N) X^T diag(d2) X + curvature:

* ``HessianFactor`` holds an explicit symmetric positive-definite
  factorization (Cholesky, falling back to pivoted Cholesky when the plain
  one fails, recording the smallest pivot either way).
* ``WoodburyFactor`` keeps H in its dual N x N form for D > N problems with
  strictly positive diagonal regularizer curvature.

Both expose ``solve`` (one or many right-hand sides) and ``quad`` (the
scalar v^T H^{-1} v).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve, get_lapack_funcs

from .data import Dataset
from .errors import SingularHessianError
from .families import loss_d1_d2
from .regularizers import Regularizer

__all__ = ["HessianFactor", "WoodburyFactor", "hessian_matrix", "build_hessian_factor"]


class HessianFactor:
    """Cholesky factorization of a symmetric positive-definite matrix.

    On a plain Cholesky failure, retries with the column-pivoted routine to
    locate the smallest pivot; a rank-deficient result raises
    SingularHessianError carrying that pivot.
    """

    def __init__(self, h: np.ndarray):
        h = np.asarray(h, dtype=float)
        self.dim = h.shape[0]
        self.matrix = h
        try:
            self._cho = cho_factor(h, lower=True, check_finite=False)
            self.smallest_pivot = float(np.min(np.diag(self._cho[0])) ** 2)
        except np.linalg.LinAlgError:
            pstrf = get_lapack_funcs(("pstrf",), (h,))[0]
            c, piv, rank, _ = pstrf(h, lower=True)
            pivots = np.diag(c)[: max(rank, 1)] ** 2
            raise SingularHessianError(
                f"Hessian of dimension {self.dim} is numerically singular "
                f"(rank {rank}, smallest pivot {pivots.min():.3e})",
                smallest_pivot=float(pivots.min()),
            ) from None

    def solve(self, b) -> np.ndarray:
        return cho_solve(self._cho, np.asarray(b, dtype=float),
                         check_finite=False)

    def quad(self, v) -> float:
        return float(np.asarray(v) @ self.solve(v))


class WoodburyFactor:
    """H = diag(lam_diag) + (1/N) X^T diag(d2) X in its N x N dual form.

    Requires every ``lam_diag`` entry strictly positive. Solves cost
    O(N^2 + N D) after an O(N^2 D + N^3) setup.
    """

    def __init__(self, x_dense: np.ndarray, d2: np.ndarray,
                 lam_diag: np.ndarray, n_scale: int):
        lam_diag = np.asarray(lam_diag, dtype=float)
        if np.any(lam_diag <= 0):
            raise ValueError("Woodbury form needs strictly positive curvature")
        self.dim = x_dense.shape[1]
        self.lam_diag = lam_diag
        self.u = x_dense * np.sqrt(np.maximum(d2, 0.0) / n_scale)[:, None]
        core = self.u @ (self.u / lam_diag).T
        core[np.diag_indices_from(core)] += 1.0
        self._cho = cho_factor(core, lower=True, check_finite=False)
        self.smallest_pivot = float(np.min(np.diag(self._cho[0])) ** 2)

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        binv = (b.T / self.lam_diag).T
        core_rhs = self.u @ binv
        corr = self.u.T @ cho_solve(self._cho, core_rhs, check_finite=False)
        return binv - (corr.T / self.lam_diag).T

    def quad(self, v) -> float:
        return float(np.asarray(v) @ self.solve(v))


def hessian_matrix(data: Dataset, reg: Regularizer, theta,
                   exclude=None) -> np.ndarray:
    """Dense D x D Hessian (1/N) X^T diag(d2) X + lam * diag(R'')."""
    theta = np.asarray(theta, dtype=float)
    z = data.matvec(theta)
    _, d2 = loss_d1_d2(data.family, z, data.y)
    if exclude is not None:
        d2 = d2.copy()
        d2[exclude] = 0.0
    x = data.dense_x()
    h = (x * d2[:, None]).T @ x / data.n
    h[np.diag_indices_from(h)] += reg.lam * reg.hess_diag(theta)
    return 0.5 * (h + h.T)


def build_hessian_factor(data: Dataset, reg: Regularizer, theta,
                         exclude=None, prefer_dual: bool | None = None):
    """Pick the dense or dual representation of the regularized Hessian.

    The dual (Woodbury) form is used when D > N and the regularizer
    curvature is strictly positive everywhere; otherwise dense Cholesky.
    """
    theta = np.asarray(theta, dtype=float)
    lam_diag = reg.lam * reg.hess_diag(theta)
    use_dual = prefer_dual
    if use_dual is None:
        use_dual = data.d > data.n and bool(np.all(lam_diag > 0))
    if use_dual and np.all(lam_diag > 0):
        z = data.matvec(theta)
        _, d2 = loss_d1_d2(data.family, z, data.y)
        if exclude is not None:
            d2 = d2.copy()
            d2[exclude] = 0.0
        return WoodburyFactor(data.dense_x(), d2, lam_diag, data.n)
    return HessianFactor(hessian_matrix(data, reg, theta, exclude=exclude))
