"""Pressure relaxation: ab-initio runs at several sub-volume counts against the DEM.

Prints the phase pressure gap and the domain-mean phase-2 density at the final
time for each run.

Usage: python scripts/relaxation_comparison.py [--out DIR] [--workers W]
"""
import argparse
from pathlib import Path

import numpy as np

from abinitio.ensemble import default_workers
from abinitio.harness import ExperimentConfig, run_case


def phase2_density(out):
    f = out.fields[max(out.fields)]
    dx = np.diff(out.edges)
    return float((f["weighted"]["Xrho"][:, 1] * dx).sum() / (f["alpha"][:, 1] * dx).sum())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/relaxation")
    ap.add_argument("--workers", type=int, default=default_workers())
    args = ap.parse_args()
    out = Path(args.out)
    for N in (50, 100, 200):
        res = run_case(ExperimentConfig(case="relaxation", N=N, out=str(out / f"N{N}")), workers=args.workers)
        s = res.series
        print(f"ab-initio N={N}: |p1-p2|(T) = {abs(s['p1'][-1] - s['p2'][-1]):.4g}, "
              f"rho2 = {phase2_density(res):.4f}")
    for r in (0.0, 1.0):
        res = run_case(ExperimentConfig(case="relaxation", solver="dem", r=r, out=str(out / "dem")))
        s = res.series
        print(f"DEM r={r:g}: |p1-p2|(T) = {abs(s['p1'][-1] - s['p2'][-1]):.4g}, rho2 = {phase2_density(res):.4f}")


if __name__ == "__main__":
    main()
