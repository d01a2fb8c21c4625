"""Command-line entry point: ``truncreg {simulate,estimate,width,bounds}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import geometry
from .harness import (
    ExperimentSpec,
    export_report,
    fit_lasso,
    fit_robust,
    histogram_csv,
    import_dataset,
    run_experiment,
)


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_simulate(args):
    kwargs = {}
    if args.grid_c:
        kwargs["grid_c"] = args.grid_c
    if args.grid_lambda:
        kwargs["grid_lambda"] = args.grid_lambda
    if args.grid_lambda_lasso:
        kwargs["grid_lambda_lasso"] = args.grid_lambda_lasso
    spec = ExperimentSpec(
        d=args.d, m=args.m, s=args.s, q_pareto=args.q, snr_db=args.snr_db,
        n_trials=args.trials, seed=args.seed, kappa=args.kappa, cv_folds=args.folds,
        design_kind=args.design, cv_criterion=args.cv_criterion, **kwargs,
    )
    report = run_experiment(spec, n_jobs=args.jobs)
    _write(args.out, export_report(report, "json", include_timing=args.timing))
    if args.hist:
        _write(args.hist, histogram_csv(report))
    if args.csv:
        _write(args.csv, export_report(report, "csv")[0])
    summ = report.summary()
    print(
        f"robust median {summ['robust']['median']:.4f}  lasso median {summ['lasso']['median']:.4f}"
        f"  ({spec.n_trials} trials, {report.wall_time:.1f}s)",
        file=sys.stderr,
    )


def cmd_estimate(args):
    data = import_dataset(args.data)
    if args.method == "robust":
        theta = fit_robust(data, args.c, args.lam, args.kappa)
    else:
        theta = fit_lasso(data, args.lam)
    lines = ["index,theta"] + [f"{k},{float(v)!r}" for k, v in enumerate(theta)]
    _write(args.out, "\n".join(lines) + "\n")


def cmd_width(args):
    rng = np.random.default_rng(args.seed)
    dims = args.dim
    if args.set == "nuclear":
        if len(dims) != 2:
            raise ValueError("--set nuclear needs --dim D1 D2")
        T = geometry.NuclearBall(dims[0], dims[1], args.radius)
    else:
        if len(dims) != 1:
            raise ValueError(f"--set {args.set} needs a single --dim")
        cls = geometry.L1Ball if args.set == "l1" else geometry.L2Ball
        T = cls(dims[0], args.radius)
    est, se = geometry.mean_width_mc(T, args.samples, rng, return_se=True)
    print(json.dumps({"set": args.set, "dim": dims, "radius": args.radius,
                      "samples": args.samples, "width": est, "stderr": se}))


def cmd_bounds(args):
    if args.kind == "sparse":
        if args.s is None or args.d is None:
            raise ValueError("--kind sparse needs --s and --d")
        kind = geometry.SparseDescent(args.s, args.d)
    else:
        if args.r is None or args.d1 is None or args.d2 is None:
            raise ValueError("--kind lowrank needs --r, --d1 and --d2")
        kind = geometry.LowRankDescent(args.r, args.d1, args.d2)
    cb = geometry.cone_bound(kind, args.c0)
    out = {
        "kind": args.kind,
        "width_bound": cb.width_sq_bound ** 0.5,
        "width_sq_bound": cb.width_sq_bound,
        "compat_bound": cb.compat_bound,
        "c0": cb.c0,
    }
    if args.m is not None:
        out["m"] = args.m
        out["error_rate"] = geometry.theoretical_error_rate(kind, args.m)
    print(json.dumps(out))


def build_parser():
    p = argparse.ArgumentParser(prog="truncreg", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run the 1-bit compressed-sensing comparison")
    sim.add_argument("--d", type=int, default=512)
    sim.add_argument("--m", type=int, default=128)
    sim.add_argument("--s", type=int, default=5)
    sim.add_argument("--q", type=float, default=2.1, help="Pareto tail index")
    sim.add_argument("--snr-db", type=float, default=None, help="omit for noiseless signs")
    sim.add_argument("--trials", type=int, default=200)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--kappa", type=float, default=1.0)
    sim.add_argument("--folds", type=int, default=2)
    sim.add_argument("--design", choices=["pareto-sphere", "gaussian"], default="pareto-sphere")
    sim.add_argument("--cv-criterion", choices=["oracle-relative-error", "validation-loss"],
                     default="oracle-relative-error")
    sim.add_argument("--grid-c", type=float, nargs="+")
    sim.add_argument("--grid-lambda", type=float, nargs="+")
    sim.add_argument("--grid-lambda-lasso", type=float, nargs="+")
    sim.add_argument("--jobs", type=int, default=1)
    sim.add_argument("--out", default="-", help="JSON report path ('-' for stdout)")
    sim.add_argument("--hist", help="histogram CSV path")
    sim.add_argument("--csv", help="per-trial CSV path")
    sim.add_argument("--timing", action="store_true", help="include wall time in the JSON report")
    sim.set_defaults(func=cmd_simulate)

    est = sub.add_parser("estimate", help="fit an estimator to a dataset CSV")
    est.add_argument("--data", required=True)
    est.add_argument("--method", choices=["robust", "lasso"], default="robust")
    est.add_argument("--lambda", dest="lam", type=float, required=True)
    est.add_argument("--c", type=float, default=1.0)
    est.add_argument("--kappa", type=float, default=1.0)
    est.add_argument("--out", default="-")
    est.set_defaults(func=cmd_estimate)

    wid = sub.add_parser("width", help="Monte-Carlo Gaussian mean width")
    wid.add_argument("--set", choices=["l1", "l2", "nuclear"], required=True)
    wid.add_argument("--dim", type=int, nargs="+", required=True)
    wid.add_argument("--radius", type=float, default=1.0)
    wid.add_argument("--samples", type=int, default=10_000)
    wid.add_argument("--seed", type=int, default=0)
    wid.set_defaults(func=cmd_width)

    bnd = sub.add_parser("bounds", help="closed-form cone, compatibility and rate bounds")
    bnd.add_argument("--kind", choices=["sparse", "lowrank"], required=True)
    bnd.add_argument("--s", type=int)
    bnd.add_argument("--d", type=float)
    bnd.add_argument("--r", type=int)
    bnd.add_argument("--d1", type=int)
    bnd.add_argument("--d2", type=int)
    bnd.add_argument("--m", type=int)
    bnd.add_argument("--c0", type=float, default=2.0)
    bnd.set_defaults(func=cmd_bounds)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"truncreg: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
