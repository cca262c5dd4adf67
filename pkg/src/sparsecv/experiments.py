"""Experiment orchestration: the figure-reproducing pipelines behind the CLI.

Every experiment is deterministic given its config: data streams are keyed
by seed, grid cells key their own sub-streams, and per-cell failures are
captured into the report instead of aborting the grid.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, fields, replace
from math import log10, sqrt
from typing import Optional

import numpy as np
import scipy.sparse as sp

from . import __version__
from .approx_cv import (
    aloo_estimate,
    ij_full,
    ij_restricted,
    ns_full,
    ns_restricted,
    percent_error,
)
from .audit import AuditInput, run_audit
from .data import Dataset
from .datasets_io import load_dataset
from .exact_cv import exact_loocv, fit_model, subsampled_cv
from .families import GlmFamily, loss_value
from .lissa import LissaConfig, ij_full_lissa
from .regularizers import RegKind, Regularizer
from .reporting import RunReport, make_row, not_computed
from .seeding import derive_seed
from .solver_l1 import SolverConfig, support_of
from .synth import gen_design, gen_responses, gen_theta_star

__all__ = ["ExperimentConfig", "run_experiment", "EXPERIMENTS",
           "METHOD_CHOICES", "resolve_lambda", "matched_subsample_budget"]

EXPERIMENTS = ("fit", "cv", "scaling", "sparse-sim", "support-sweep",
               "lambda-sweep", "lissa-frontier", "audit")

METHOD_CHOICES = ("exact", "ns", "ij", "ns-restricted", "ij-restricted",
                  "ij-lissa", "smoothed-ns", "smoothed-ij", "subsample")

# Fold budget of the reference comparison: 41 subsampled refits, chosen
# there to cost about as much as the approximate methods' full pass.
_SUBSAMPLE_FOLDS = 41


def matched_subsample_budget(n: int) -> int:
    return min(_SUBSAMPLE_FOLDS, n)


@dataclass
class ExperimentConfig:
    experiment: str
    # data source: a file, or synthetic with the fields below
    data_path: Optional[str] = None
    data_format: str = "libsvm"
    family: str = "logistic"
    n: Optional[int] = None
    d: Optional[int] = None
    deff: int = 5
    theta_mode: str = "unit"
    noise_sigma: float = 1.0
    # regularizer: explicit lam wins over the coef * sqrt(log D / N) rule
    reg: str = "l1"
    lam: Optional[float] = None
    lambda_coef: Optional[float] = None
    eta: float = 100.0
    # execution
    methods: tuple = ()
    exact: bool = False
    seeds: tuple = (0,)
    threads: int = 1
    tol: float = 1e-10
    kkt_tol: float = 1e-9
    max_iters: int = 1000
    standardize: bool = False
    # grids
    n_grid: tuple = ()
    fixed_d: int = 5
    d_rule: str = "n/10"
    lambda_coefs: tuple = (1.0, 10.0)
    lambda_grid: tuple = ()
    test_size: int = 10_000
    subsample_k: Optional[int] = None
    lissa_depth: int = 100
    lissa_repeats: int = 10
    lissa_k_grid: tuple = (1, 20, 30, 50, 60, 80, 100, 120)
    lissa_m_grid: tuple = (2, 25)
    # audit constants
    alpha: float = 0.5
    c_x: float = 1.0
    c_eps: float = 1.0
    big_c: float = 1.0
    # output
    out: Optional[str] = None
    figures: bool = True

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; "
                             f"choose from {EXPERIMENTS}")
        if not self.seeds:
            raise ValueError("seeds must be nonempty")
        if self.lambda_coef is not None and self.lambda_coef <= 0:
            raise ValueError("lambda-coef must be positive")
        bad = [m for m in self.methods if m not in METHOD_CHOICES]
        if bad:
            raise ValueError(f"unknown methods {bad}; choose from "
                             f"{METHOD_CHOICES}")

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            out[f.name] = list(val) if isinstance(val, tuple) else val
        return out


def resolve_lambda(cfg: ExperimentConfig, n: int, d: int) -> float:
    """Either the explicit lam, or coef * sqrt(log10(D) / N).

    Base-10 log: the reference coefficient values (1.5 for the sparse
    simulations and real data, the 1-vs-10 support-sweep arms) only
    reproduce the reported regimes under base 10; natural log puts them
    above lambda-max, where every fit is identically zero.
    """
    if cfg.lam is not None:
        return float(cfg.lam)
    if cfg.lambda_coef is not None:
        return float(cfg.lambda_coef) * sqrt(log10(d) / n)
    raise ValueError("set either lam or lambda-coef")


def _solver_config(cfg: ExperimentConfig) -> SolverConfig:
    return SolverConfig(tol=cfg.tol, kkt_tol=cfg.kkt_tol,
                        max_iters=cfg.max_iters)


def _regularizer(cfg: ExperimentConfig, lam: float) -> Regularizer:
    kind = RegKind.parse(cfg.reg)
    eta = cfg.eta if kind is RegKind.SMOOTHED_L1 else None
    return Regularizer(kind, lam, eta)


def _standardized(data: Dataset) -> Dataset:
    """Scale columns to unit standard deviation (no centering: no intercept)."""
    x = data.x
    if sp.issparse(x):
        dense_sq = np.asarray(x.multiply(x).mean(axis=0)).ravel()
        mean = np.asarray(x.mean(axis=0)).ravel()
        std = np.sqrt(np.maximum(dense_sq - mean**2, 0.0))
        std[std == 0] = 1.0
        scaled = x @ sp.diags_array(1.0 / std)
        return Dataset(sp.csc_array(scaled), data.y, data.family)
    std = np.std(np.asarray(x), axis=0)
    std[std == 0] = 1.0
    return Dataset(np.asarray(x) / std, data.y, data.family)


def _synthetic(cfg: ExperimentConfig, seed: int, n: int, d: int,
               family=None) -> tuple[Dataset, np.ndarray]:
    family = GlmFamily.parse(family or cfg.family)
    x = gen_design(n, d, seed)
    theta_star = gen_theta_star(d, min(cfg.deff, d), cfg.theta_mode, seed)
    y = gen_responses(x, theta_star, family, cfg.noise_sigma, seed)
    return Dataset(x, y, family), theta_star


def _load_or_synth(cfg: ExperimentConfig, seed: int):
    if cfg.data_path is not None:
        data = load_dataset(cfg.data_path, cfg.data_format, cfg.family)
        theta_star = None
    else:
        if cfg.n is None or cfg.d is None:
            raise ValueError("synthetic runs need n and d")
        data, theta_star = _synthetic(cfg, seed, cfg.n, cfg.d)
    if cfg.standardize:
        data = _standardized(data)
    return data, theta_star


def _support_sizes(loos) -> list:
    return [int(support_of(loos.thetas[n]).size)
            for n in sorted(loos.thetas)]


def _method_block(aloo=None, loo=None, pct=None, wall=None, extra=None):
    block = {
        "aloo": aloo if aloo is not None else not_computed(),
        "loo": loo if loo is not None else not_computed(),
        "percent_error": pct if pct is not None else not_computed(),
        "wall_time_seconds": wall,
    }
    if extra:
        block.update(extra)
    return block


def _run_methods(data: Dataset, reg: Regularizer, cfg: ExperimentConfig,
                 seed: int, methods, rows, n_tag=None, d_tag=None,
                 param="", keep_support_lists=True):
    """Shared CV driver: fit once, then evaluate each requested method."""
    solver = _solver_config(cfg)
    n_tag = n_tag if n_tag is not None else data.n
    d_tag = d_tag if d_tag is not None else data.d
    out: dict = {"methods": {}}
    t0 = time.perf_counter()
    fit = fit_model(data, reg, solver)
    fit_wall = time.perf_counter() - t0
    out["fit"] = {
        "support_size": int(fit.support.size),
        "objective_value": fit.objective_value,
        "kkt_violation": fit.kkt_violation,
        "converged": bool(fit.converged),
        "wall_time_seconds": fit_wall,
    }

    loo = None
    if "exact" in methods or cfg.exact:
        loos, loo = exact_loocv(data, reg, solver, threads=cfg.threads,
                                fit=fit)
        extra = {"failures": loos.failures}
        if keep_support_lists:
            extra["per_n_support_sizes"] = _support_sizes(loos)
        out["methods"]["exact"] = _method_block(
            aloo=loo, loo=loo, wall=loos.wall_time, extra=extra)
        if loo is not None:
            rows.append(make_row("exact", n_tag, d_tag, "loo", loo, seed,
                                 param))
        rows.append(make_row("exact", n_tag, d_tag, "wall_time_seconds",
                             loos.wall_time, seed, param))

    def finish(name, loos, stderr=None):
        aloo = aloo_estimate(data, loos)
        pct = None
        if loo is not None and loo != 0:
            pct = percent_error(aloo, loo)
            rows.append(make_row(name, n_tag, d_tag, "percent_error", pct,
                                 seed, param))
        rows.append(make_row(name, n_tag, d_tag, "aloo", aloo, seed, param))
        rows.append(make_row(name, n_tag, d_tag, "wall_time_seconds",
                             loos.wall_time, seed, param))
        extra = {}
        if keep_support_lists:
            extra["per_n_support_sizes"] = _support_sizes(loos)
        if stderr is not None:
            extra["stderr"] = stderr
        out["methods"][name] = _method_block(
            aloo=aloo, loo=loo, pct=pct, wall=loos.wall_time, extra=extra)

    smoothed_fit = None
    for method in methods:
        if method == "exact":
            continue
        if method in ("ns", "ij"):
            func = ns_full if method == "ns" else ij_full
            finish(f"{method}_full", func(data, reg, fit))
        elif method in ("ns-restricted", "ij-restricted"):
            func = ns_restricted if method == "ns-restricted" else ij_restricted
            finish(method.replace("-", "_"), func(data, reg.lam, fit))
        elif method in ("smoothed-ns", "smoothed-ij"):
            smooth_reg = Regularizer(RegKind.SMOOTHED_L1, reg.lam, cfg.eta)
            if smoothed_fit is None:
                t0 = time.perf_counter()
                smoothed_fit = fit_model(data, smooth_reg, solver)
                out["fit_smoothed"] = {
                    "wall_time_seconds": time.perf_counter() - t0,
                    "converged": bool(smoothed_fit.converged),
                    "kkt_violation": smoothed_fit.kkt_violation,
                }
            func = ns_full if method == "smoothed-ns" else ij_full
            loos = func(data, smooth_reg, smoothed_fit)
            loos.method = method.replace("-", "_")
            loos.wall_time += out["fit_smoothed"]["wall_time_seconds"]
            finish(loos.method, loos)
        elif method == "ij-lissa":
            lcfg = LissaConfig(depth_k=cfg.lissa_depth,
                               repeats_m=cfg.lissa_repeats,
                               seed=derive_seed(seed, ["lissa"]))
            finish("ij_lissa", ij_full_lissa(data, reg, fit, lcfg))
        elif method == "subsample":
            k = cfg.subsample_k or matched_subsample_budget(data.n)
            t0 = time.perf_counter()
            est, stderr = subsampled_cv(
                data, reg, k, derive_seed(seed, ["subsample"]), solver,
                threads=cfg.threads, fit=fit)
            wall = time.perf_counter() - t0
            pct = None
            if loo is not None and loo != 0:
                pct = percent_error(est, loo)
                rows.append(make_row("subsample", n_tag, d_tag,
                                     "percent_error", pct, seed, param))
            rows.append(make_row("subsample", n_tag, d_tag, "aloo", est,
                                 seed, param))
            rows.append(make_row("subsample", n_tag, d_tag,
                                 "wall_time_seconds", wall, seed, param))
            out["methods"]["subsample"] = _method_block(
                aloo=est, loo=loo, pct=pct, wall=wall,
                extra={"stderr": stderr, "k": k})
    return out, fit


def _exp_fit(cfg: ExperimentConfig):
    rows, results, errors = [], {}, []
    for seed in cfg.seeds:
        data, _ = _load_or_synth(cfg, seed)
        lam = resolve_lambda(cfg, data.n, data.d)
        reg = _regularizer(cfg, lam)
        t0 = time.perf_counter()
        fit = fit_model(data, reg, _solver_config(cfg))
        wall = time.perf_counter() - t0
        results[f"seed={seed}"] = {
            "n": data.n, "d": data.d, "lambda": lam,
            "support_size": int(fit.support.size),
            "support": fit.support.tolist()[:1000],
            "objective_value": fit.objective_value,
            "kkt_violation": fit.kkt_violation,
            "converged": bool(fit.converged),
            "iterations": fit.iterations,
            "wall_time_seconds": wall,
        }
        for metric in ("support_size", "objective_value", "kkt_violation",
                       "wall_time_seconds"):
            rows.append(make_row("fit", data.n, data.d, metric,
                                 results[f"seed={seed}"][metric], seed))
    return results, rows, errors


def _exp_cv(cfg: ExperimentConfig):
    rows, results, errors = [], {}, []
    methods = cfg.methods or ("ij-restricted",)
    for seed in cfg.seeds:
        try:
            data, _ = _load_or_synth(cfg, seed)
            lam = resolve_lambda(cfg, data.n, data.d)
            reg = _regularizer(cfg, lam)
            block, _ = _run_methods(data, reg, cfg, seed, methods, rows)
            block["lambda"] = lam
            results[f"seed={seed}"] = block
        except Exception as err:
            errors.append({"cell": {"seed": seed}, "error":
                           f"{type(err).__name__}: {err}"})
    return results, rows, errors


def _exp_scaling(cfg: ExperimentConfig):
    """Percent error of the full-dimensional approximations as N grows,
    with a fixed-D arm and a D = N/10 arm."""
    rows, results, errors = [], {}, []
    n_grid = cfg.n_grid or (500, 1000, 2000, 4000)
    lam = cfg.lam if cfg.lam is not None else 0.01
    methods = cfg.methods or ("ns", "ij")
    base = replace(cfg, reg=cfg.reg if cfg.reg != "l1" else "l2", lam=lam,
                   exact=True)
    for arm in ("fixed-d", "d=n/10"):
        for n in n_grid:
            d = cfg.fixed_d if arm == "fixed-d" else max(cfg.fixed_d, n // 10)
            for seed in cfg.seeds:
                try:
                    data, _ = _synthetic(base, seed, n, d)
                    reg = _regularizer(base, lam)
                    block, _ = _run_methods(
                        data, reg, base, seed, methods, rows, n_tag=n,
                        d_tag=d, keep_support_lists=False)
                    results[f"arm={arm},N={n},seed={seed}"] = {
                        k: v for k, v in block["methods"].items()}
                except Exception as err:
                    errors.append({"cell": {"arm": arm, "n": n, "seed": seed},
                                   "error": f"{type(err).__name__}: {err}"})
    return results, rows, errors


def _exp_sparse_sim(cfg: ExperimentConfig):
    """Restricted approximations vs smoothing vs subsampling on a sparse
    high-dimensional logistic problem, all scored against exact LOO.

    The default lambda coefficient is desk-calibrated: logistic per-column
    signal at zero saturates near 0.4/sqrt(deff) no matter how strong
    theta* is, so at N=200 the reference coefficient 1.5 sits above
    lambda-max and would yield the empty fit.
    """
    rows, results, errors = [], {}, []
    n = cfg.n or 200
    d = cfg.d or 4000
    methods = cfg.methods or ("ij-restricted", "ns-restricted",
                              "smoothed-ij", "smoothed-ns", "subsample")
    base = replace(cfg, reg="l1",
                   lambda_coef=cfg.lambda_coef or 1.0, lam=cfg.lam,
                   exact=True)
    lam = resolve_lambda(base, n, d)
    for seed in cfg.seeds:
        try:
            data, _ = _synthetic(base, seed, n, d)
            reg = Regularizer(RegKind.L1, lam)
            block, _ = _run_methods(data, reg, base, seed, methods, rows)
            block["lambda"] = lam
            results[f"seed={seed}"] = block
        except Exception as err:
            errors.append({"cell": {"seed": seed},
                           "error": f"{type(err).__name__}: {err}"})
    return results, rows, errors


def _exp_support_sweep(cfg: ExperimentConfig):
    """Leave-one-out support sizes under a support-recovering lambda and a
    too-small lambda, across N with D = N/10."""
    rows, results, errors = [], {}, []
    n_grid = cfg.n_grid or (1000, 2000, 4000)
    solver = _solver_config(cfg)
    base = replace(cfg, family="linear")
    for coef in cfg.lambda_coefs:
        for n in n_grid:
            d = max(cfg.fixed_d, n // 10) if base.d_rule == "n/10" \
                else (cfg.d or n // 10)
            lam = coef * sqrt(log10(d) / n)
            for seed in cfg.seeds:
                try:
                    data, theta_star = _synthetic(base, seed, n, d,
                                                  family="linear")
                    reg = Regularizer(RegKind.L1, lam)
                    fit = fit_model(data, reg, solver)
                    loos, _ = exact_loocv(data, reg, solver,
                                          threads=cfg.threads, fit=fit)
                    sizes = _support_sizes(loos)
                    cell = {
                        "lambda": lam,
                        "fit_support_size": int(fit.support.size),
                        "per_n_support_sizes": sizes,
                        "fold_support_max": int(max(sizes)),
                        "fold_support_min": int(min(sizes)),
                        "stable": bool(
                            all(set(support_of(loos.thetas[m]).tolist())
                                == set(fit.support.tolist())
                                for m in range(data.n))),
                    }
                    results[f"coef={coef:g},N={n},seed={seed}"] = cell
                    param = f"{coef:g}"
                    for metric in ("fold_support_max", "fold_support_min",
                                   "fit_support_size"):
                        rows.append(make_row("exact", n, d, metric,
                                             cell[metric], seed, param))
                    rows.append(make_row("exact", n, d, "stable",
                                         float(cell["stable"]), seed, param))
                except Exception as err:
                    errors.append({"cell": {"coef": coef, "n": n,
                                            "seed": seed},
                                   "error": f"{type(err).__name__}: {err}"})
    return results, rows, errors


def _exp_lambda_sweep(cfg: ExperimentConfig):
    """Train/test/LOO/ALOO curves over a lambda grid (model selection)."""
    rows, results, errors = [], {}, []
    n = cfg.n or 300
    d = cfg.d or 75
    coefs = cfg.lambda_grid or tuple(np.geomspace(0.05, 4.0, 10).tolist())
    solver = _solver_config(cfg)
    base = replace(cfg, family="logistic", theta_mode="gaussian")
    for seed in cfg.seeds:
        data, theta_star = _synthetic(base, seed, n, d, family="logistic")
        test_x = gen_design(cfg.test_size, d, derive_seed(seed, ["test"]))
        test_y = gen_responses(test_x, theta_star, "logistic",
                               seed=derive_seed(seed, ["test"]))
        test_data = Dataset(test_x, test_y, "logistic")
        for coef in coefs:
            lam = coef * sqrt(log10(d) / n)
            param = f"{lam:.6g}"
            cell_key = f"coef={coef:g},seed={seed}"
            try:
                reg = Regularizer(RegKind.L1, lam)
                fit = fit_model(data, reg, solver)
                train = float(np.mean(loss_value(
                    data.family, data.matvec(fit.theta), data.y)))
                test = float(np.mean(loss_value(
                    test_data.family, test_data.matvec(fit.theta),
                    test_data.y)))
                cell = {"lambda": lam, "train_loss": train,
                        "test_loss": test,
                        "support_size": int(fit.support.size)}
                rows.append(make_row("fit", n, d, "train_loss", train, seed,
                                     param))
                rows.append(make_row("fit", n, d, "test_loss", test, seed,
                                     param))
                loo = None
                if cfg.exact:
                    loos, loo = exact_loocv(data, reg, solver,
                                            threads=cfg.threads, fit=fit)
                    if loo is not None:
                        cell["loo"] = loo
                        rows.append(make_row("exact", n, d, "loo", loo,
                                             seed, param))
                for name, func in (("aloo_ns", ns_restricted),
                                   ("aloo_ij", ij_restricted)):
                    try:
                        loos = func(data, lam, fit)
                        aloo = aloo_estimate(data, loos)
                        cell[name] = aloo
                        rows.append(make_row(name.replace("aloo_", "") +
                                             "_restricted", n, d, name,
                                             aloo, seed, param))
                    except Exception as err:
                        cell[name] = {"value": None,
                                      "reason": f"{type(err).__name__}: {err}"}
                results[cell_key] = cell
            except Exception as err:
                errors.append({"cell": {"coef": coef, "seed": seed},
                               "error": f"{type(err).__name__}: {err}"})
    return results, rows, errors


def _exp_lissa_frontier(cfg: ExperimentConfig):
    """Accuracy-versus-time frontier of stochastic inverse-Hessian solves
    against the exactly solved jackknife."""
    rows, results, errors = [], {}, []
    n = cfg.n or 500
    d = cfg.d or 100
    lam = cfg.lam if cfg.lam is not None else 0.8
    solver = _solver_config(cfg)
    base = replace(cfg, family="logistic", reg="l2", lam=lam)
    for seed in cfg.seeds:
        data, _ = _synthetic(base, seed, n, d, family="logistic")
        reg = Regularizer(RegKind.L2, lam)
        fit = fit_model(data, reg, solver)
        t0 = time.perf_counter()
        reference = ij_full(data, reg, fit)
        ref_wall = time.perf_counter() - t0
        ref_updates = {m: reference.thetas[m] - fit.theta
                       for m in range(data.n)}
        ref_norms = {m: np.linalg.norm(u) for m, u in ref_updates.items()}
        rows.append(make_row("ij_full", n, d, "wall_time_seconds", ref_wall,
                             seed, "exact"))
        for k in cfg.lissa_k_grid:
            for m_rep in cfg.lissa_m_grid:
                param = f"K={k},M={m_rep}"
                try:
                    lcfg = LissaConfig(depth_k=k, repeats_m=m_rep,
                                       seed=derive_seed(seed, ["lissa", k,
                                                               m_rep]))
                    t0 = time.perf_counter()
                    loos = ij_full_lissa(data, reg, fit, lcfg)
                    wall = time.perf_counter() - t0
                    rel = [np.linalg.norm(loos.thetas[i] - reference.thetas[i])
                           / ref_norms[i]
                           for i in range(data.n) if ref_norms[i] > 0]
                    err_val = float(np.mean(rel))
                    results[f"seed={seed},{param}"] = {
                        "solve_relative_error": err_val,
                        "wall_time_seconds": wall,
                    }
                    rows.append(make_row("ij_lissa", n, d,
                                         "solve_relative_error", err_val,
                                         seed, param))
                    rows.append(make_row("ij_lissa", n, d,
                                         "wall_time_seconds", wall, seed,
                                         param))
                except Exception as err:
                    errors.append({"cell": {"seed": seed, "K": k,
                                            "M": m_rep},
                                   "error": f"{type(err).__name__}: {err}"})
    return results, rows, errors


def _exp_audit(cfg: ExperimentConfig):
    """Support-stability audit on synthetic or file data."""
    rows, results, errors = [], {}, []
    for seed in cfg.seeds:
        try:
            if cfg.data_path is not None:
                data, _ = _load_or_synth(cfg, seed)
                lam = resolve_lambda(cfg, data.n, data.d)
                fit = fit_model(data, Regularizer(RegKind.L1, lam),
                                _solver_config(cfg))
                theta_star = fit.theta
                s = fit.support
                surrogate = True
            else:
                n = cfg.n or 500
                d = cfg.d or 100
                data, theta_star = _synthetic(cfg, seed, n, d)
                lam = resolve_lambda(cfg, n, d)
                s = support_of(theta_star)
                surrogate = False
            inp = AuditInput(data=data, theta_star=theta_star, s=s, lam=lam,
                             alpha=cfg.alpha, c_x=cfg.c_x, c_eps=cfg.c_eps,
                             big_c=cfg.big_c, surrogate_truth=surrogate)
            report = run_audit(inp, _solver_config(cfg),
                               include_condition1=cfg.exact,
                               threads=cfg.threads)
            cell = {k: v for k, v in vars(report).items()
                    if k != "supports_by_n"}
            if report.supports_by_n is not None:
                sizes = [len(v["exact"])
                         for v in report.supports_by_n.values()]
                cell["fold_support_sizes"] = sizes
            results[f"seed={seed}"] = cell
            for metric in ("incoherence_norm", "max_jnd_norm", "min_eig_loo",
                           "max_grad_inf_loo", "beta_min_margin", "lssc_k",
                           "lambda_threshold", "mj", "gamma_empirical"):
                val = getattr(report, metric)
                if val is not None and np.isfinite(val):
                    rows.append(make_row("audit", data.n, data.d, metric,
                                         val, seed))
        except Exception as err:
            errors.append({"cell": {"seed": seed},
                           "error": f"{type(err).__name__}: {err}"})
    return results, rows, errors


_RUNNERS = {
    "fit": _exp_fit,
    "cv": _exp_cv,
    "scaling": _exp_scaling,
    "sparse-sim": _exp_sparse_sim,
    "support-sweep": _exp_support_sweep,
    "lambda-sweep": _exp_lambda_sweep,
    "lissa-frontier": _exp_lissa_frontier,
    "audit": _exp_audit,
}


def run_experiment(cfg: ExperimentConfig) -> RunReport:
    results, rows, errors = _RUNNERS[cfg.experiment](cfg)
    return RunReport(
        experiment=cfg.experiment,
        config=cfg.to_dict(),
        results=results,
        rows=rows,
        errors=errors,
        seeds=list(cfg.seeds),
        artifact_version=__version__,
    )
