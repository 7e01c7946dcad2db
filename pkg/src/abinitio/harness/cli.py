"""Command line entry point.

::

    abinitio run <case> [--solver abinitio|dem] [--config FILE] [--full-scale]
                 [--seed S] [--workers W] [--out DIR] [--set key=value ...]
    abinitio converge <case> --axis {samples|subvolumes|mesh} --points 8 16 32 ...
                     [--outer AXIS --outer-points P1 P2 ...]
    abinitio compare A.csv B.csv

The default worker count is read from ``ABINITIO_WORKERS``.
"""
from __future__ import annotations

import argparse
import logging
import sys

from ..ensemble import default_workers
from .cases import CASES, SOLVERS, ExperimentConfig
from .config import load_config, parse_value
from .experiments import AXES, compare_runs, run_bivariate, run_case, run_convergence

log = logging.getLogger("abinitio")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("case", choices=sorted(CASES))
    p.add_argument("--solver", choices=SOLVERS)
    p.add_argument("--config", help="experiment file with an [experiment] section")
    p.add_argument("--full-scale", action="store_true", help="use the full-size parameters")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="worker processes (default: $ABINITIO_WORKERS or 1)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any experiment setting, e.g. --set L=128")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="abinitio", description="Ab-initio two-phase flow statistics.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment")
    _common(run)
    conv = sub.add_parser("converge", help="Cauchy-rate sweep over one parameter")
    _common(conv)
    conv.add_argument("--axis", choices=AXES, required=True)
    conv.add_argument("--points", type=int, nargs="+", required=True)
    conv.add_argument("--outer", choices=AXES, help="repeat the sweep for each value of this axis")
    conv.add_argument("--outer-points", type=int, nargs="+", default=[])
    cmp_ = sub.add_parser("compare", help="L1 distances between two field CSVs")
    cmp_.add_argument("a")
    cmp_.add_argument("b")
    return ap


def config_from_args(args) -> ExperimentConfig:
    overrides = {"case": args.case, "solver": args.solver, "seed": args.seed, "out": args.out}
    if args.full_scale:
        overrides["full_scale"] = True
    for item in args.set:
        if "=" not in item:
            raise SystemExit(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        overrides[k.strip()] = parse_value(k.strip(), v)
    if args.config:
        return load_config(args.config, **overrides)
    return ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "compare":
        for name, d in compare_runs(args.a, args.b).items():
            print(f"{name},{d!r}")
        return 0
    cfg = config_from_args(args)
    workers = args.workers if args.workers is not None else default_workers()
    if args.command == "run":
        out = run_case(cfg, workers=workers)
        log.info("wrote %d files to %s in %.1f s", len(out.files), out.config.out, out.wall_time)
        print(f"{out.config.out}: {', '.join(out.files)}")
        return 0
    if args.outer:
        if not args.outer_points:
            raise SystemExit("--outer needs --outer-points")
        reports = run_bivariate(cfg, args.outer, args.outer_points, args.axis, args.points, workers=workers)
    else:
        reports = {None: run_convergence(cfg, args.axis, args.points, workers=workers)}
    for value, report in reports.items():
        prefix = "" if value is None else f"{args.outer}={value},"
        for key in sorted(report.slopes):
            print(f"{prefix}{key},slope={report.slopes[key]!r},C={report.constants[key]!r}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
