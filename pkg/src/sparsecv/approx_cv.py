"""Deterministic leave-one-out approximations.

Full-dimensional forms (twice-differentiable penalties only), with
H = (1/N) X^T diag(d2) X + lam * nabla^2 R evaluated at the fit:

    newton-step:   theta + (1/N) (H - (1/N) d2_n x_n x_n^T)^{-1} d1_n x_n
    jackknife:     theta + (1/N) H^{-1} d1_n x_n

Support-restricted forms for l1 fits act on the support block only (the
penalty contributes no curvature there) and are exactly zero elsewhere.
For GLMs the per-point Hessian downdate is rank one, so every newton-step
update comes from the single shared factorization via Sherman-Morrison:

    update_n = (1/N) * d1_n / (1 - (d2_n/N) x_n^T H^{-1} x_n) * H^{-1} x_n
"""

from __future__ import annotations

import time

import numpy as np

from .data import Dataset
from .errors import (
    IncompleteLooSetError,
    SingularDowndateError,
    SingularHessianError,
    SupportTooLargeError,
)
from .exact_cv import LooSet
from .families import loss_d1_d2, loss_value
from .linalg import HessianFactor, build_hessian_factor
from .regularizers import Regularizer
from .solver_l1 import FitResult

__all__ = [
    "HessianFactor",
    "ij_full",
    "ns_full",
    "ij_restricted",
    "ns_restricted",
    "aloo_estimate",
    "percent_error",
]

SM_DENOM_FLOOR = 1e-12


def _point_derivatives(data: Dataset, theta):
    z = data.matvec(theta)
    return loss_d1_d2(data.family, z, data.y)


def _full_solves(data: Dataset, reg: Regularizer, fit: FitResult):
    """Shared setup for the full-dimensional methods: factor H once and
    solve against every row of the design."""
    if not reg.differentiable:
        from .errors import NonDifferentiableRegularizerError

        raise NonDifferentiableRegularizerError(
            "full-dimensional approximations need a twice-differentiable "
            "penalty; use the support-restricted forms for l1"
        )
    d1, d2 = _point_derivatives(data, fit.theta)
    factor = build_hessian_factor(data, reg, fit.theta)
    solves = factor.solve(data.dense_x().T)  # D x N, column n = H^{-1} x_n
    return d1, d2, solves


def ij_full(data: Dataset, reg: Regularizer, fit: FitResult) -> LooSet:
    """Infinitesimal-jackknife approximation over all D dimensions."""
    t0 = time.perf_counter()
    d1, _, solves = _full_solves(data, reg, fit)
    scale = d1 / data.n
    thetas = {n: fit.theta + scale[n] * solves[:, n] for n in range(data.n)}
    return LooSet("ij_full", thetas, wall_time=time.perf_counter() - t0)


def ns_full(data: Dataset, reg: Regularizer, fit: FitResult) -> LooSet:
    """One-Newton-step approximation over all D dimensions."""
    t0 = time.perf_counter()
    d1, d2, solves = _full_solves(data, reg, fit)
    x = data.dense_x()
    lever = np.einsum("nd,dn->n", x, solves) * (d2 / data.n)
    denom = 1.0 - lever
    bad = int(np.argmin(denom))
    if denom[bad] <= SM_DENOM_FLOOR:
        raise SingularDowndateError(
            f"downdated Hessian for point {bad} is numerically singular "
            f"(denominator {denom[bad]:.3e})",
            index=bad, denominator=float(denom[bad]),
        )
    scale = d1 / (data.n * denom)
    thetas = {n: fit.theta + scale[n] * solves[:, n] for n in range(data.n)}
    return LooSet("ns_full", thetas, wall_time=time.perf_counter() - t0)


def _restricted_solves(data: Dataset, fit: FitResult):
    s = np.asarray(fit.support, dtype=int)
    xs = data.columns(s)
    d1, d2 = _point_derivatives(data, fit.theta)
    h = (xs * d2[:, None]).T @ xs / data.n
    h = 0.5 * (h + h.T)
    try:
        factor = HessianFactor(h)
    except SingularHessianError as err:
        raise SingularHessianError(
            f"restricted Hessian on support of size {s.size} is singular",
            smallest_pivot=err.smallest_pivot,
        ) from None
    return s, xs, d1, d2, factor.solve(xs.T)


def _pad_restricted(data, fit, s, updates):
    thetas = {}
    for n in range(data.n):
        vec = np.zeros(data.d)
        vec[s] = fit.theta[s] + updates[:, n]
        thetas[n] = vec
    return thetas


def ij_restricted(data: Dataset, lam: float, fit: FitResult) -> LooSet:
    """Jackknife approximation restricted to the recovered support."""
    t0 = time.perf_counter()
    if fit.support.size == 0:
        thetas = {n: fit.theta.copy() for n in range(data.n)}
        return LooSet("ij_restricted", thetas,
                      wall_time=time.perf_counter() - t0)
    s, _, d1, _, solves = _restricted_solves(data, fit)
    updates = solves * (d1 / data.n)[None, :]
    thetas = _pad_restricted(data, fit, s, updates)
    return LooSet("ij_restricted", thetas, wall_time=time.perf_counter() - t0)


def ns_restricted(data: Dataset, lam: float, fit: FitResult) -> LooSet:
    """Newton-step approximation restricted to the recovered support."""
    t0 = time.perf_counter()
    if fit.support.size == 0:
        thetas = {n: fit.theta.copy() for n in range(data.n)}
        return LooSet("ns_restricted", thetas,
                      wall_time=time.perf_counter() - t0)
    if fit.support.size >= data.n:
        raise SupportTooLargeError(
            f"support size {fit.support.size} >= N={data.n}: the per-point "
            f"downdated restricted Hessian is rank deficient"
        )
    s, xs, d1, d2, solves = _restricted_solves(data, fit)
    lever = np.einsum("nd,dn->n", xs, solves) * (d2 / data.n)
    denom = 1.0 - lever
    bad = int(np.argmin(denom))
    if denom[bad] <= SM_DENOM_FLOOR:
        raise SingularDowndateError(
            f"downdated restricted Hessian for point {bad} is numerically "
            f"singular (denominator {denom[bad]:.3e})",
            index=bad, denominator=float(denom[bad]),
        )
    updates = solves * (d1 / (data.n * denom))[None, :]
    thetas = _pad_restricted(data, fit, s, updates)
    return LooSet("ns_restricted", thetas, wall_time=time.perf_counter() - t0)


def aloo_estimate(data: Dataset, loos: LooSet) -> float:
    """Mean left-out loss under approximate leave-one-out parameters."""
    if not loos.complete_over(data.n):
        raise IncompleteLooSetError(
            f"LooSet has {len(loos.thetas)} entries, expected {data.n}"
        )
    vals = np.empty(data.n)
    for n in range(data.n):
        z = float(data.row(n) @ loos.thetas[n])
        vals[n] = loss_value(data.family, z, data.y[n])
    return float(np.mean(vals))


def percent_error(aloo: float, loo: float) -> float:
    """|aloo - loo| / loo, the headline accuracy metric."""
    if loo == 0:
        raise ZeroDivisionError("percent error undefined when loo = 0")
    return abs(aloo - loo) / loo
