"""Command-line entry point.

Subcommands: `run <config>` executes a scenario file, `reproduce <figN>`
runs a canned figure preset, `selftest` runs the built-in oracle suite.
Exit codes: 0 success, 2 configuration error, 3 Fock truncation overflow,
4 numerical failure. The default output directory comes from the
KERRFISHER_OUT environment variable when set.
"""

import argparse
import os
import sys
from dataclasses import replace

from .errors import ConfigError, NumericalError, TruncationOverflowError
from .figures import FIGURES, reproduce_figure
from .scenario import (emit_bounds_csv, emit_csv, emit_distribution_csv,
                       load_config, run_point_results, scenario_id)
from .selftest import run_selftest

OUT_ENV = "KERRFISHER_OUT"


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="kerrfisher",
        description="Fisher-information analysis of a driven lossy Kerr "
                    "resonator: QFIM, Uhlmann curvature, Cramer-Rao bounds, "
                    "and homodyne Fisher information.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a scenario config file")
    run_p.add_argument("config", help="path to a sectioned key-value config")
    run_p.add_argument("--out", default=None,
                       help=f"output directory (default: ${OUT_ENV} or .)")
    run_p.add_argument("--dim", type=int, default=None,
                       help="override Fock truncation dimension")
    run_p.add_argument("--tmax", type=float, default=None,
                       help="override final time")
    run_p.add_argument("--rel-tol", type=float, default=None,
                       help="override integrator relative tolerance")
    run_p.add_argument("--theta", default=None,
                       help="override LO phases (comma-separated radians)")
    run_p.add_argument("--jobs", type=int, default=None,
                       help="worker processes for sweep points "
                            "(default: CPU count)")

    rep_p = sub.add_parser("reproduce", help="run a canned figure preset")
    rep_p.add_argument("figure", choices=FIGURES)
    rep_p.add_argument("--out", default=None,
                       help=f"output directory (default: ${OUT_ENV} or .)")
    rep_p.add_argument("--jobs", type=int, default=None,
                       help="worker processes for sweep points")

    sub.add_parser("selftest", help="run the built-in oracle suite")
    return parser


def _outdir(arg):
    out = arg if arg is not None else os.environ.get(OUT_ENV, ".")
    os.makedirs(out, exist_ok=True)
    return out


def _apply_overrides(cfg, args):
    prop = cfg.propagation
    if args.dim is not None:
        prop = replace(prop, dim=args.dim)
    if args.tmax is not None:
        prop = replace(prop, t_max=args.tmax)
    if args.rel_tol is not None:
        prop = replace(prop, rel_tol=args.rel_tol)
    cfg = replace(cfg, propagation=prop)
    if args.theta is not None:
        thetas = tuple(float(tok) for tok in args.theta.split(",") if tok.strip())
        if not thetas:
            raise ConfigError("--theta: empty phase list")
        cfg = replace(cfg, thetas=thetas)
    return cfg


def _cmd_run(args):
    cfg = load_config(args.config)
    try:
        cfg = _apply_overrides(cfg, args)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    outdir = _outdir(args.out)

    results = run_point_results(cfg, jobs=args.jobs)
    rows = [row for pr in results for row in pr.rows]
    written = [emit_csv(rows, os.path.join(outdir, "results.csv"))]
    if "bounds" in cfg.outputs:
        written.append(emit_bounds_csv(
            rows, os.path.join(outdir, "bounds.csv")))
    if "distributions" in cfg.outputs:
        for pr in results:
            for theta in cfg.thetas:
                sid = scenario_id(pr.params, theta)
                written.append(emit_distribution_csv(
                    pr, theta, os.path.join(outdir, f"dist_{sid}.csv")))
    for path in written:
        print(path)
    return 0


def _cmd_reproduce(args):
    outdir = _outdir(args.out)
    for path in reproduce_figure(args.figure, outdir, jobs=args.jobs):
        print(path)
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "reproduce":
            return _cmd_reproduce(args)
        return run_selftest()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TruncationOverflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
