"""Cauchy-rate studies of the mechanical-equilibrium case.

Sweeps the number of samples, the number of sub-volumes (uniform and
random layouts) and prints the fitted log-log slopes.

Usage: python scripts/convergence_study.py [--out DIR] [--workers W] [--seed S]
"""
import argparse
from pathlib import Path

from abinitio.ensemble import default_workers
from abinitio.harness import ExperimentConfig, run_convergence


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/convergence")
    ap.add_argument("--workers", type=int, default=default_workers())
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.out)
    base = dict(case="mech-equilibrium", M=100, seed=args.seed)

    rep = run_convergence(ExperimentConfig(N=128, out=str(out / "samples"), **base), "samples",
                          [8, 16, 32, 64, 128, 256, 512], workers=args.workers)
    print(f"samples: mean_total slope {rep.slopes['mean_total']:.3f}")

    for sampler in ("uniform", "random"):
        rep = run_convergence(ExperimentConfig(L=64, sampler=sampler, out=str(out / sampler), **base),
                              "subvolumes", [32, 64, 128, 256], workers=args.workers)
        rates = ", ".join(f"{v:.3g}" for v in rep.total["var"])
        print(f"subvolumes ({sampler}): var_total rates {rates}")


if __name__ == "__main__":
    main()
