"""Built-in test cases and the experiment configuration.

All cases live on ``[-1, 1]`` with a single discontinuity at ``x = 0``.
Each phase has its own left and right primitive state ``(rho, u, p)`` and
the phase-1 fraction jumps from ``alpha_left`` to ``alpha_right``.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from ..dem import DemConfig, DemState
from ..ensemble import EnsembleConfig
from ..eos import EosParams
from ..front_tracking import FtConfig
from ..microscale import GpConfig, MacroCellSpec
from ..riemann import FullState

__all__ = ["CaseSpec", "CASES", "ExperimentConfig", "resolve", "SOLVERS", "FORMAT_VERSION"]

FORMAT_VERSION = 1
SOLVERS = ("abinitio", "dem")


@dataclass(frozen=True)
class CaseSpec:
    """Initial data and default run parameters of a named case.

    ``desk`` and ``full`` map :class:`ExperimentConfig` field names to
    the defaults of the reduced and of the full-size runs.
    """

    name: str
    alpha_left: float
    alpha_right: float
    left1: tuple
    left2: tuple
    right1: tuple
    right2: tuple
    eos1: tuple
    eos2: tuple
    T: float
    desk: dict
    full: dict


_IG = (1.4, 0.0, 0.0)

CASES = {
    "mech-equilibrium": CaseSpec(
        "mech-equilibrium", 0.9, 0.1,
        (1.0, 0.9, 0.3), (1.0, 0.9, 0.3), (0.125, 0.9, 0.3), (0.125, 0.9, 0.3),
        _IG, (1.6, 0.0, 0.0), 0.1,
        desk=dict(M=100, N=128, L=64, delta1=0.01, delta2=0.01),
        full=dict(M=1000, N=16384, L=1024, delta1=0.01, delta2=0.01),
    ),
    "relaxation": CaseSpec(
        "relaxation", 0.9, 0.9,
        (1.0, 0.0, 1.0), (0.125, 0.0, 0.1), (1.0, 0.0, 1.0), (0.125, 0.0, 0.1),
        _IG, (1.6, 0.0, 0.0), 1e-3,
        desk=dict(M=200, N=100, L=64, delta1=0.1, delta2=0.1, resample_steps=100, n_outputs=100,
                  dem_M=200),
        full=dict(M=1000, N=2000, L=1000, delta1=0.1, delta2=0.1, resample_steps=100,
                   n_outputs=100, dem_M=10000),
    ),
    "sod2p": CaseSpec(
        "sod2p", 0.9, 0.1,
        (1.0, 0.0, 1.0), (1.0, 0.0, 1.0), (0.125, 0.0, 0.1), (0.125, 0.0, 0.1),
        _IG, (1.6, 0.0, 0.0), 0.2,
        desk=dict(M=100, N=64, L=32, delta1=0.05, delta2=0.05, resample_steps=100,
                  min_front_strength=1e-7, dem_M=800),
        full=dict(M=500, N=6400, L=1000, delta1=0.05, delta2=0.05, resample_steps=100,
                   min_front_strength=1e-7, dem_M=10000),
    ),
    "lax2p": CaseSpec(
        "lax2p", 0.9, 0.1,
        (0.2, 0.7, 3.5), (1.0, 0.7, 3.5), (0.2, 0.0, 0.1), (1.0, 0.0, 0.1),
        _IG, (1.6, 2.5, 0.0), 0.1,
        desk=dict(M=100, N=50, L=32, delta1=0.05, delta2=0.1, resample_steps=100,
                  min_front_strength=1e-5, dem_M=800),
        full=dict(M=500, N=5000, L=1000, delta1=0.05, delta2=0.1, resample_steps=100,
                   min_front_strength=1e-5, dem_M=10000),
    ),
}
# custom runs start from the two-phase Sod data; every field can be overridden
CASES["custom"] = replace(CASES["sod2p"], name="custom")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment; ``None`` fields take the case defaults in :func:`resolve`.

    Parameters
    ----------
    case : str
        One of ``CASES``.
    solver : {"abinitio", "dem"}
    M : int
        Macro cells of the ab-initio run.
    N : int
        Sub-volumes per cell.
    L : int
        Samples.
    dem_M : int
        Cells of the DEM run.
    n_outputs : int
        Equispaced output times in ``(0, T]``; the time series uses them too.
    min_front_strength : float
        Weak-wave cutoff of the front tracking; shock tube cases use a
        larger value to bound the number of acoustic reflections between
        sub-volume interfaces.
    """

    case: str = "mech-equilibrium"
    solver: str = "abinitio"
    full_scale: bool = False
    M: int | None = None
    N: int | None = None
    L: int | None = None
    T: float | None = None
    delta1: float | None = None
    delta2: float | None = None
    cfl: float | None = None
    resample_steps: int | None = None
    min_front_strength: float | None = None
    sampler: str = "uniform"
    seed: int = 0
    gp_nu: float = 1.5
    gp_zeta: float = 0.06
    gp_width: float = 1.0 / 200
    dem_M: int | None = None
    r: float = 0.0
    lam: float = 0.0
    relaxation: str = "instantaneous"
    dem_cfl: float = 0.9
    n_outputs: int | None = None
    alpha_left: float | None = None
    alpha_right: float | None = None
    left1: tuple | None = None
    left2: tuple | None = None
    right1: tuple | None = None
    right2: tuple | None = None
    eos1: tuple | None = None
    eos2: tuple | None = None
    out: str = "out"

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}; choose from {sorted(CASES)}")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}")
        for name in ("M", "N", "L", "dem_M", "n_outputs", "resample_steps"):
            v = getattr(self, name)
            if v is not None and int(v) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.T is not None and not self.T > 0:
            raise ValueError("T must be positive")

    # -- derived objects -------------------------------------------------

    @property
    def phases(self) -> tuple[EosParams, EosParams]:
        return (EosParams(*self.eos1), EosParams(*self.eos2))

    @property
    def output_times(self) -> tuple:
        n = self.n_outputs
        return tuple(float(self.T) * (j + 1) / n for j in range(n))

    def edges(self, M: int) -> np.ndarray:
        return np.linspace(-1.0, 1.0, M + 1)

    def ft_config(self) -> FtConfig:
        return FtConfig(delta=(self.delta1, self.delta2), cfl=self.cfl, resample_steps=self.resample_steps,
                        min_front_strength=self.min_front_strength)

    def cells(self):
        e = self.edges(self.M)
        k1, k2 = self.phases
        out = []
        for i in range(self.M):
            left = 0.5 * (e[i] + e[i + 1]) < 0.0
            s1 = self.left1 if left else self.right1
            s2 = self.left2 if left else self.right2
            a = self.alpha_left if left else self.alpha_right
            out.append(MacroCellSpec(float(e[i]), float(e[i + 1]), float(a),
                                     (FullState.of(*s1, k1), FullState.of(*s2, k2))))
        return out

    def ensemble_config(self) -> EnsembleConfig:
        return EnsembleConfig(
            cells=self.cells(), n_samples=self.L, T=self.T, ft=self.ft_config(),
            sampler=self.sampler, n_sub=self.N,
            gp=GpConfig(self.gp_nu, self.gp_zeta, self.gp_width), seed=self.seed,
            output_times=self.output_times)

    def dem_config(self) -> DemConfig:
        return DemConfig(r=self.r, lam=self.lam, cfl=self.dem_cfl, relaxation=self.relaxation)

    def dem_state(self) -> DemState:
        e = self.edges(self.dem_M)
        xc = 0.5 * (e[1:] + e[:-1])
        left = xc < 0.0
        a1 = np.where(left, self.alpha_left, self.alpha_right)
        prim = []
        for j in range(3):
            prim.append(np.stack([np.where(left, self.left1[j], self.right1[j]),
                                  np.where(left, self.left2[j], self.right2[j])], axis=1))
        return DemState.from_primitive(e, a1, *prim, self.phases)

    def to_dict(self) -> dict:
        return asdict(self)


def resolve(cfg: ExperimentConfig) -> ExperimentConfig:
    """Fill every unset field from the case data and the desk or full-scale defaults."""
    case = CASES[cfg.case]
    scale = case.full if cfg.full_scale else case.desk
    fill = dict(M=100, N=128, L=64, delta1=0.05, delta2=0.05, dem_M=scale.get("M", 100), n_outputs=1,
                min_front_strength=1e-11)
    fill.update(scale)
    fill.update(T=case.T, alpha_left=case.alpha_left, alpha_right=case.alpha_right,
                left1=case.left1, left2=case.left2, right1=case.right1, right2=case.right2,
                eos1=case.eos1, eos2=case.eos2)
    changes = {}
    for f in fields(cfg):
        if getattr(cfg, f.name) is None and f.name in fill:
            changes[f.name] = fill[f.name]
    out = replace(cfg, **changes)
    for name in ("left1", "left2", "right1", "right2", "eos1", "eos2"):
        v = tuple(float(x) for x in getattr(out, name))
        if len(v) != 3:
            raise ValueError(f"{name} needs three values")
        out = replace(out, **{name: v})
    return out
