"""Experiment definitions, configuration files, outputs and the command line."""
from .cases import CASES, CaseSpec, ExperimentConfig, resolve
from .experiments import (
    ConvergenceReport,
    RunOutput,
    compare_runs,
    run_bivariate,
    run_case,
    run_convergence,
)

__all__ = [
    "CASES",
    "CaseSpec",
    "ExperimentConfig",
    "resolve",
    "RunOutput",
    "ConvergenceReport",
    "run_case",
    "run_convergence",
    "run_bivariate",
    "compare_runs",
]
