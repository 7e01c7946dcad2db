"""Run every built-in case with both solvers at desk scale.

Usage: python scripts/run_all_cases.py [--out DIR] [--workers W] [--samples L]
"""
import argparse
from pathlib import Path

from abinitio.ensemble import default_workers
from abinitio.harness import CASES, ExperimentConfig, run_case


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/cases")
    ap.add_argument("--workers", type=int, default=default_workers())
    ap.add_argument("--samples", type=int, help="override L for every case")
    args = ap.parse_args()
    for case in sorted(c for c in CASES if c != "custom"):
        d = Path(args.out) / case
        out = run_case(ExperimentConfig(case=case, L=args.samples, out=str(d)), workers=args.workers)
        print(f"{case} abinitio: {out.wall_time:.1f} s, {len(out.files)} files")
        for r in (0.0, 1.0):
            out = run_case(ExperimentConfig(case=case, solver="dem", r=r, out=str(d)))
            print(f"{case} dem r={r:g}: {out.wall_time:.1f} s")


if __name__ == "__main__":
    main()
