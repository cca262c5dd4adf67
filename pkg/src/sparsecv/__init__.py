"""Exact and approximate leave-one-out cross-validation for l1/l2
regularized GLMs, with support-restricted approximations that stay fast
and accurate in high dimensions."""

from .approx_cv import (
    HessianFactor,
    aloo_estimate,
    ij_full,
    ij_restricted,
    ns_full,
    ns_restricted,
    percent_error,
)
from .data import Dataset
from .exact_cv import LooSet, exact_loocv, fit_model, loo_refit, subsampled_cv
from .families import GlmFamily, loss_d1_d2, loss_value
from .lissa import LissaConfig, ij_full_lissa, lissa_inverse_hvp
from .objective import objective_gradient, objective_value, restricted_hessian
from .regularizers import RegKind, Regularizer
from .seeding import derive_seed
from .solver_l1 import FitResult, SolverConfig, fit_l1, soft_threshold, support_of
from .solver_smooth import fit_smooth
from .synth import gen_design, gen_responses, gen_theta_star

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "FitResult",
    "GlmFamily",
    "HessianFactor",
    "LissaConfig",
    "LooSet",
    "RegKind",
    "Regularizer",
    "SolverConfig",
    "aloo_estimate",
    "derive_seed",
    "exact_loocv",
    "fit_l1",
    "fit_model",
    "fit_smooth",
    "gen_design",
    "gen_responses",
    "gen_theta_star",
    "ij_full",
    "ij_full_lissa",
    "ij_restricted",
    "lissa_inverse_hvp",
    "loo_refit",
    "loss_d1_d2",
    "loss_value",
    "ns_full",
    "ns_restricted",
    "objective_gradient",
    "objective_value",
    "percent_error",
    "restricted_hessian",
    "soft_threshold",
    "subsampled_cv",
    "support_of",
    "__version__",
]
