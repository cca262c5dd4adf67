"""Support-stability diagnostics: every checkable quantity behind the
high-dimensional accuracy guarantees, evaluated on concrete data.

Conventions follow the source analysis: gradient-based quantities use the
(1/N)-scaled loss sum, while eigenvalue/curvature quantities (min_eig_loo,
the LSSC constant, the lambda-smallness bound, beta-min) use unnormalized
row sums, whose natural magnitude is order N. Logistic curvature rows are
scaled by sqrt(d2) evaluated at the reference parameter.

Every unspecified analysis constant is exposed as the single knob
``big_c`` (default 1): the formulas' shapes are exact, their constants are
not claimed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .approx_cv import ij_restricted, ns_restricted
from .data import Dataset
from .errors import AlphaExceededError, SingularHessianError
from .exact_cv import exact_loocv, fit_model
from .families import GlmFamily, loss_d1_d2
from .regularizers import Regularizer
from .solver_l1 import SolverConfig, support_of

__all__ = [
    "AuditInput",
    "AuditReport",
    "check_condition1",
    "incoherence_norm",
    "jnd_loo",
    "max_jnd_norm",
    "min_eig_loo",
    "bounded_gradient_stat",
    "lssc_constant",
    "lambda_small_ok",
    "lambda_threshold",
    "beta_min_margin",
    "run_audit",
]


@dataclass
class AuditInput:
    """Data plus the reference parameter and analysis constants.

    ``theta_star`` is the ground truth when synthetic; on real data pass
    the full-data fit and set ``surrogate_truth``. ``c_x``/``c_eps`` are
    sub-Gaussian scale parameters (user-supplied; no estimator exists),
    and ``big_c`` stands in for every unspecified constant.
    """

    data: Dataset
    theta_star: np.ndarray
    s: np.ndarray
    lam: float
    alpha: float
    c_x: float = 1.0
    c_eps: float = 1.0
    big_c: float = 1.0
    surrogate_truth: bool = False

    def __post_init__(self):
        self.theta_star = np.asarray(self.theta_star, dtype=float)
        self.s = np.asarray(self.s, dtype=int)
        if self.s.size and (self.s.min() < 0 or self.s.max() >= self.data.d):
            raise ValueError("support indices out of range")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")


@dataclass
class AuditReport:
    condition1_holds: Optional[bool]
    supports_by_n: Optional[dict]
    incoherence_norm: Optional[float]
    max_jnd_norm: Optional[float]
    min_eig_loo: Optional[float]
    max_grad_inf_loo: Optional[float]
    beta_min_margin: Optional[float]
    lssc_k: Optional[float]
    lambda_small_ok: Optional[bool]
    lambda_threshold: Optional[float]
    mj: Optional[float]
    gamma_empirical: Optional[float] = None
    bounded_gradient_ok: Optional[bool] = None
    lmin_over_n: Optional[float] = None
    surrogate_truth: bool = False
    unavailable: dict = field(default_factory=dict)


def _weighted_rows(data: Dataset, theta_star) -> np.ndarray:
    """Design rows scaled by sqrt(d2) at the reference parameter."""
    x = data.dense_x()
    if data.family is GlmFamily.LINEAR:
        return x
    z = data.matvec(theta_star)
    _, d2 = loss_d1_d2(data.family, z, data.y)
    return x * np.sqrt(d2)[:, None]


def _complement(d, s):
    mask = np.ones(d, dtype=bool)
    mask[s] = False
    return np.flatnonzero(mask)


def incoherence_norm(data: Dataset, theta_star, s) -> float:
    """inf-norm of Hess_{S^c,S} (Hess_{S,S})^{-1} at the reference point."""
    s = np.asarray(s, dtype=int)
    xt = _weighted_rows(data, theta_star)
    sc = _complement(data.d, s)
    if sc.size == 0:
        return 0.0
    xs = xt[:, s]
    g = xs.T @ xs
    try:
        product = np.linalg.solve(g, xs.T @ xt[:, sc])
    except np.linalg.LinAlgError:
        raise SingularHessianError(
            "restricted Hessian on S is singular") from None
    return float(np.max(np.sum(np.abs(product), axis=0)))


def jnd_loo(data: Dataset, s, n: int, d: int,
            theta_star=None) -> tuple[np.ndarray, float]:
    """Leave-one-out regression of off-support column d onto the support.

    For logistic data pass ``theta_star`` so rows carry sqrt(d2) weights.
    """
    s = np.asarray(s, dtype=int)
    if d in set(s.tolist()):
        raise ValueError(f"column {d} is in the support")
    if not (0 <= n < data.n):
        raise IndexError(f"n={n} out of range")
    if data.family is GlmFamily.LOGISTIC and theta_star is None:
        raise ValueError("logistic J_nd needs theta_star for the d2 weights")
    xt = _weighted_rows(data, theta_star)
    keep = np.arange(data.n) != n
    xs = xt[keep][:, s]
    xd = xt[keep][:, d]
    g = xs.T @ xs
    try:
        vec = np.linalg.solve(g, xs.T @ xd)
    except np.linalg.LinAlgError:
        raise SingularHessianError(
            f"leave-one-out Gram matrix on S is singular for n={n}"
        ) from None
    return vec, float(np.sum(np.abs(vec)))


def max_jnd_norm(data: Dataset, s, theta_star=None) -> float:
    """max over (n, d in S^c) of ||J_nd||_1, via rank-one downdates."""
    s = np.asarray(s, dtype=int)
    sc = _complement(data.d, s)
    if sc.size == 0 or s.size == 0:
        return 0.0
    xt = _weighted_rows(data, theta_star)
    xs = xt[:, s]
    xsc = xt[:, sc]
    g = xs.T @ xs
    rhs = xs.T @ xsc
    worst = 0.0
    for n in range(data.n):
        gn = g - np.outer(xs[n], xs[n])
        rn = rhs - np.outer(xs[n], xsc[n])
        try:
            sol = np.linalg.solve(gn, rn)
        except np.linalg.LinAlgError:
            raise SingularHessianError(
                f"leave-one-out Gram matrix on S is singular for n={n}"
            ) from None
        worst = max(worst, float(np.max(np.sum(np.abs(sol), axis=0))))
    return worst


def min_eig_loo(data: Dataset, theta_star, s) -> float:
    """min over n of the smallest eigenvalue of the leave-one-out
    restricted curvature (unnormalized row sums)."""
    s = np.asarray(s, dtype=int)
    xt = _weighted_rows(data, theta_star)[:, s]
    g = xt.T @ xt
    worst = np.inf
    for n in range(data.n):
        gn = g - np.outer(xt[n], xt[n])
        worst = min(worst, float(np.linalg.eigvalsh(gn)[0]))
    return worst


def bounded_gradient_stat(data: Dataset, theta_star, gamma: float,
                          lam: float) -> tuple[float, bool]:
    """max_n inf-norm of the leave-one-out gradient at the reference point,
    compared to (gamma/4)*lam."""
    theta_star = np.asarray(theta_star, dtype=float)
    z = data.matvec(theta_star)
    d1, _ = loss_d1_d2(data.family, z, data.y)
    g_full = data.rmatvec(d1)
    x = data.dense_x()
    worst = 0.0
    block = max(1, int(2**22 / max(data.d, 1)))
    for lo in range(0, data.n, block):
        hi = min(lo + block, data.n)
        loo_grads = g_full[None, :] - d1[lo:hi, None] * x[lo:hi]
        worst = max(worst, float(np.max(np.abs(loo_grads))))
    worst /= data.n
    return worst, bool(worst <= (gamma / 4.0) * lam)


def lssc_constant(data: Dataset, s, family=None) -> float:
    """Directional third-derivative bound: 0 for squared error, data
    dependent for logistic."""
    family = GlmFamily.parse(family if family is not None else data.family)
    if family is GlmFamily.LINEAR:
        return 0.0
    s = np.asarray(s, dtype=int)
    x = data.dense_x()
    max_inf = float(np.max(np.abs(x)))
    max_sq = float(np.max(np.sum(x[:, s] ** 2, axis=1))) if s.size else 0.0
    return 0.25 * max_inf * max_sq


def lambda_small_ok(lssc_k: float, l_min: float, gamma: float, deff: int,
                    lam: float) -> bool:
    """lam < L_min^2 * gamma / (4 (gamma+4)^2 deff K); no constraint if K=0."""
    if lssc_k == 0.0:
        return True
    if deff == 0:
        return True
    bound = l_min**2 * gamma / (4.0 * (gamma + 4.0) ** 2 * deff * lssc_k)
    return bool(lam < bound)


def _mj_terms(n, d, deff, c_x, big_c, den1):
    cx2 = c_x**2
    cx4 = c_x**4
    if deff == 0 or d - deff < 1:
        return 0.0
    num1 = (big_c * deff
            * (math.sqrt(50.0 * cx2) + math.sqrt(2.0 * cx2 * math.log(n * (d - deff))))
            * (math.sqrt(deff) + math.sqrt(50.0 * cx4) + math.sqrt(2.0 * cx4 * math.log(n))))
    num2 = (big_c * deff
            * (deff + deff * cx2 * (math.log(n) + 26.0))
            * (math.sqrt(n) + math.sqrt(50.0 * cx4) + math.sqrt(2.0 * cx4 * math.log(d - deff)))
            * (math.sqrt(n * deff) + math.sqrt(50.0 * cx4)))
    if den1 <= 0:
        return math.inf
    return num1 / den1 + num2 / den1**2


def lambda_threshold(kind, n: int, d: int, deff: int, alpha: float,
                     c_x: float, c_eps: Optional[float] = None,
                     l_min: Optional[float] = None,
                     big_c: float = 1.0) -> tuple[float, float]:
    """Closed-form regularization threshold and its M_J slack scalar.

    ``kind`` is "linear" or "logistic". Linear needs c_eps; logistic needs
    the restricted min-eigenvalue constant l_min (unnormalized scale).
    Raises AlphaExceededError when M_J >= alpha (threshold undefined).
    """
    kind = GlmFamily.parse(kind)
    cx2 = c_x**2
    if kind is GlmFamily.LINEAR:
        den1 = n - 3.0 * cx2 * math.sqrt(n) * (math.sqrt(deff) + 5.0)
        mj = _mj_terms(n, d, deff, c_x, big_c, den1)
        if mj >= alpha:
            raise AlphaExceededError(
                f"M_J = {mj:.4g} >= alpha = {alpha:.4g}", mj=mj)
        if c_eps is None:
            raise ValueError("linear threshold needs c_eps")
        ce2 = c_eps**2
        threshold = (
            math.sqrt(cx2 * ce2 * math.log(d) / (n * big_c)
                      + 25.0 * cx2 * ce2 / (n * big_c))
            + 4.0 * c_x * c_eps * (math.log(n * d) + 26.0) / n
        ) / (alpha - mj)
        return threshold, mj
    if l_min is None:
        raise ValueError("logistic threshold needs l_min")
    den1 = l_min - cx2 * math.sqrt(n) * (math.sqrt(deff) + 5.0)
    mj = _mj_terms(n, d, deff, c_x, big_c, den1)
    if mj >= alpha:
        raise AlphaExceededError(
            f"M_J = {mj:.4g} >= alpha = {alpha:.4g}", mj=mj)
    threshold = big_c * (
        math.sqrt(cx2 * (25.0 + math.log(d)) / n)
        + (math.sqrt(2.0 * cx2 * math.log(n * d)) + math.sqrt(50.0 * cx2)) / n
    ) / (alpha - mj)
    return threshold, mj


def beta_min_margin(theta_star, s, gamma: float, l_min: float, deff: int,
                    lam: float) -> float:
    """min_s |theta*_s| minus sqrt(deff) (gamma+4) lam / L_min."""
    s = np.asarray(s, dtype=int)
    theta_star = np.asarray(theta_star, dtype=float)
    if s.size == 0:
        raise ValueError("beta-min margin needs a nonempty support")
    smallest = float(np.min(np.abs(theta_star[s])))
    return smallest - math.sqrt(deff) * (gamma + 4.0) * lam / l_min


def check_condition1(data: Dataset, reg: Regularizer, fit,
                     config: Optional[SolverConfig] = None,
                     threads: int = 1) -> tuple[bool, dict]:
    """Do exact LOO and both restricted approximations share one support?

    A single-fold dataset (N=1) is trivially stable.
    """
    config = config or SolverConfig()
    s_hat = set(fit.support.tolist())
    supports = {}
    if data.n == 1:
        supports[0] = {"exact": sorted(s_hat), "ij": sorted(s_hat),
                       "ns": sorted(s_hat)}
        return True, supports
    loos, _ = exact_loocv(data, reg, config, threads=threads, fit=fit)
    ij = ij_restricted(data, reg.lam, fit)
    ns = ns_restricted(data, reg.lam, fit)
    holds = True
    for n in range(data.n):
        entry = {
            "exact": support_of(loos.thetas[n]).tolist(),
            "ij": support_of(ij.thetas[n]).tolist(),
            "ns": support_of(ns.thetas[n]).tolist(),
        }
        supports[n] = entry
        if any(set(v) != s_hat for v in entry.values()):
            holds = False
    return holds, supports


def run_audit(inp: AuditInput, config: Optional[SolverConfig] = None,
              include_condition1: bool = False,
              threads: int = 1) -> AuditReport:
    """Evaluate every audit quantity, marking failures as unavailable."""
    data, s = inp.data, inp.s
    deff = int(s.size)
    unavailable: dict[str, str] = {}

    def attempt(name, fn):
        try:
            return fn()
        except Exception as err:  # recorded, never fatal to the report
            unavailable[name] = f"{type(err).__name__}: {err}"
            return None

    incoh = attempt("incoherence_norm",
                    lambda: incoherence_norm(data, inp.theta_star, s))
    max_jnd = attempt("max_jnd_norm",
                      lambda: max_jnd_norm(data, s, inp.theta_star))
    gamma = None if max_jnd is None else 1.0 - max_jnd
    l_min = attempt("min_eig_loo",
                    lambda: min_eig_loo(data, inp.theta_star, s))
    lssc = attempt("lssc_k", lambda: lssc_constant(data, s))

    max_grad = bg_ok = None
    if gamma is not None:
        bg = attempt("max_grad_inf_loo",
                     lambda: bounded_gradient_stat(data, inp.theta_star,
                                                   gamma, inp.lam))
        if bg is not None:
            max_grad, bg_ok = bg

    small_ok = None
    if lssc is not None and l_min is not None and gamma is not None:
        small_ok = lambda_small_ok(lssc, l_min, gamma, deff, inp.lam)

    beta_margin = None
    if l_min is not None and gamma is not None and deff > 0:
        beta_margin = attempt(
            "beta_min_margin",
            lambda: beta_min_margin(inp.theta_star, s, gamma, l_min, deff,
                                    inp.lam))

    threshold = mj = None
    try:
        threshold, mj = lambda_threshold(
            data.family, data.n, data.d, deff, inp.alpha, inp.c_x,
            c_eps=inp.c_eps, l_min=l_min, big_c=inp.big_c)
    except AlphaExceededError as err:
        # threshold undefined, but the slack itself is still reportable
        mj = err.mj
        unavailable["lambda_threshold"] = f"AlphaExceededError: {err}"
    except Exception as err:
        unavailable["lambda_threshold"] = f"{type(err).__name__}: {err}"

    cond1 = supports = None
    if include_condition1:
        reg = Regularizer("l1", inp.lam)
        def _cond():
            fit = fit_model(data, reg, config)
            return check_condition1(data, reg, fit, config, threads=threads)
        got = attempt("condition1", _cond)
        if got is not None:
            cond1, supports = got

    return AuditReport(
        condition1_holds=cond1,
        supports_by_n=supports,
        incoherence_norm=incoh,
        max_jnd_norm=max_jnd,
        min_eig_loo=l_min,
        max_grad_inf_loo=max_grad,
        beta_min_margin=beta_margin,
        lssc_k=lssc,
        lambda_small_ok=small_ok,
        lambda_threshold=threshold,
        mj=mj,
        gamma_empirical=gamma,
        bounded_gradient_ok=bg_ok,
        lmin_over_n=None if l_min is None else l_min / data.n,
        surrogate_truth=inp.surrogate_truth,
        unavailable=unavailable,
    )
