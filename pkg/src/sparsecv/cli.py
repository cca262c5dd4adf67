"""Command-line front end.

One subcommand per experiment plus the dataset-shrinking preprocessor.
Reports land under --out as report.json, raw.csv, medians.csv, and (for
curve-producing experiments) PNG figures. Exit code 0 on success; on
failure a JSON error block is printed and the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys

from .datasets_io import preprocess_rcv1
from .errors import SparseCvError
from .experiments import (
    EXPERIMENTS,
    METHOD_CHOICES,
    ExperimentConfig,
    run_experiment,
)
from .reporting import emit_report


def _int_list(text: str) -> tuple:
    return tuple(int(tok) for tok in text.split(",") if tok != "")


def _float_list(text: str) -> tuple:
    return tuple(float(tok) for tok in text.split(",") if tok != "")


def _method_list(text: str) -> tuple:
    methods = tuple(tok.strip() for tok in text.split(",") if tok.strip())
    bad = [m for m in methods if m not in METHOD_CHOICES]
    if bad:
        raise argparse.ArgumentTypeError(
            f"unknown methods {bad}; choose from {', '.join(METHOD_CHOICES)}")
    return methods


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("data")
    g.add_argument("--data", dest="data_path", default=None,
                   help="dataset file (omit to use synthetic data)")
    g.add_argument("--format", dest="data_format",
                   choices=("libsvm", "csv"), default="libsvm")
    g.add_argument("--family", choices=("linear", "logistic"),
                   default="logistic")
    g.add_argument("--n", type=int, default=None,
                   help="synthetic sample count")
    g.add_argument("--d", type=int, default=None,
                   help="synthetic dimension")
    g.add_argument("--deff", type=int, default=5,
                   help="true support size for synthetic data")
    g.add_argument("--theta-mode", choices=("unit", "gaussian"),
                   default="unit")
    g.add_argument("--noise-sigma", type=float, default=1.0)
    g.add_argument("--standardize", action="store_true",
                   help="scale design columns to unit standard deviation")
    r = p.add_argument_group("regularizer")
    r.add_argument("--reg", choices=("l1", "l2", "smoothed-l1"),
                   default="l1")
    r.add_argument("--lambda", dest="lam", type=float, default=None)
    r.add_argument("--lambda-coef", type=float, default=None,
                   help="lambda = coef * sqrt(log10(D)/N)")
    r.add_argument("--eta", type=float, default=100.0,
                   help="smoothed-l1 sharpness")
    e = p.add_argument_group("execution")
    e.add_argument("--methods", type=_method_list, default=(),
                   help=f"comma list from: {', '.join(METHOD_CHOICES)}")
    e.add_argument("--exact", action="store_true",
                   help="also run exact LOOCV (can be slow)")
    e.add_argument("--seeds", type=_int_list, default=(0,),
                   help="comma list of integer seeds")
    e.add_argument("--threads", type=int, default=1)
    e.add_argument("--tol", type=float, default=1e-10)
    e.add_argument("--kkt-tol", type=float, default=1e-9)
    e.add_argument("--max-iters", type=int, default=1000)
    o = p.add_argument_group("output")
    o.add_argument("--out", default=None,
                   help="report directory (prints a summary if omitted)")
    o.add_argument("--no-figures", dest="figures", action="store_false",
                   help="skip PNG rendering")
    return p


def _add_grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-grid", type=_int_list, default=(),
                   help="comma list of N values")
    p.add_argument("--fixed-d", type=int, default=5)
    p.add_argument("--lambda-coefs", type=_float_list, default=(1.0, 10.0),
                   help="support-sweep arms")
    p.add_argument("--lambda-grid", type=_float_list, default=(),
                   help="lambda-sweep coefficient grid")
    p.add_argument("--test-size", type=int, default=10_000)
    p.add_argument("--subsample-k", type=int, default=None)
    p.add_argument("--lissa-depth", type=int, default=100)
    p.add_argument("--lissa-repeats", type=int, default=10)
    p.add_argument("--lissa-k-grid", type=_int_list,
                   default=(1, 20, 30, 50, 60, 80, 100, 120))
    p.add_argument("--lissa-m-grid", type=_int_list, default=(2, 25))
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--c-x", type=float, default=1.0)
    p.add_argument("--c-eps", type=float, default=1.0)
    p.add_argument("--big-c", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsecv",
        description="Exact and approximate LOOCV for l1/l2-regularized GLMs",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_parser()
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, parents=[common],
                            help=f"run the {name} experiment")
        _add_grid_args(sp)
    pre = sub.add_parser("preprocess-rcv1",
                         help="shrink a large sparse libsvm dataset")
    pre.add_argument("--data", required=True)
    pre.add_argument("--out", required=True,
                     help="output libsvm path")
    pre.add_argument("--n-features", type=int, default=10_000)
    pre.add_argument("--n-documents", type=int, default=5_000)
    pre.add_argument("--seed", type=int, default=0)
    return parser


def _config_from_args(args) -> ExperimentConfig:
    keys = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}
    values = {k: v for k, v in vars(args).items() if k in keys}
    return ExperimentConfig(experiment=args.command, **values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "preprocess-rcv1":
            summary = preprocess_rcv1(args.data, args.out,
                                      n_features=args.n_features,
                                      n_documents=args.n_documents,
                                      seed=args.seed)
            print(json.dumps({"preprocess-rcv1": summary}, sort_keys=True))
            return 0
        cfg = _config_from_args(args)
        report = run_experiment(cfg)
        if cfg.out:
            paths = emit_report(report, cfg.out, figures=cfg.figures)
            print(json.dumps(
                {"experiment": report.experiment,
                 "errors": len(report.errors),
                 "paths": {k: str(v) for k, v in paths.items()}},
                sort_keys=True))
        else:
            print(json.dumps(
                {"experiment": report.experiment,
                 "results": report.results,
                 "errors": report.errors},
                sort_keys=True, default=str, indent=2))
        return 0
    except (SparseCvError, ValueError, OSError) as err:
        print(json.dumps({"error": {"type": type(err).__name__,
                                    "message": str(err)}}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
