"""Random two-phase microstructures with prescribed volume fractions.

Two samplers are provided.

* :func:`generate_uniform` splits every macro cell into ``N`` equal
  sub-cells and assigns phase 1 to a uniformly random subset of
  ``round(alpha N)`` of them. In ``random`` mode ``N`` itself is drawn per
  cell from ``Unif{1..N}``.
* :func:`generate_gp` thresholds a Gaussian process with Matérn covariance.
  Its mean is shifted so that ``P(g >= 0) = alpha`` pointwise.

Every (sample, cell) pair owns an independent counter-based random stream,
so a realization depends only on the master seed and its indices.
"""
from __future__ import annotations

import csv
import functools
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import linalg, special

from .front_tracking import PhaseLayout
from .riemann import FullState

__all__ = [
    "MacroCellSpec",
    "GpConfig",
    "MicroRealization",
    "FactorizationError",
    "SampleStreams",
    "round_half_away",
    "subcell_counts",
    "generate_uniform",
    "realized_fraction",
    "matern_kernel",
    "gp_mean_from_alpha",
    "gp_alpha",
    "generate_gp",
    "layout_count",
    "enumerate_layouts",
    "dump_layout_csv",
]

PURE_TOL = 1e-12


class FactorizationError(np.linalg.LinAlgError):
    """The GP covariance is not positive definite even after jitter."""


@dataclass(frozen=True)
class MacroCellSpec:
    """Initial data of one macro cell.

    Parameters
    ----------
    lo, hi : float
        Cell bounds.
    alpha : float
        Volume fraction of phase 1; phase 2 holds ``1 - alpha``.
    states : (FullState, FullState)
        State of each phase.
    """

    lo: float
    hi: float
    alpha: float
    states: tuple[FullState, FullState]

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("empty cell")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        for s in self.states:
            s.state.check(s.params)

    @property
    def fractions(self) -> tuple[float, float]:
        return (self.alpha, 1.0 - self.alpha)


@dataclass(frozen=True)
class GpConfig:
    """Matérn Gaussian-process sampler settings.

    Parameters
    ----------
    nu : float
        Smoothness.
    zeta : float
        Length scale.
    grid_width : float
        Spacing of the sampling grid; also the smallest dispersed width.
    jitter : float
        Relative diagonal regularization of the covariance.
    """

    nu: float = 1.5
    zeta: float = 0.06
    grid_width: float = 1.0 / 200
    jitter: float = 1e-10

    def __post_init__(self):
        if min(self.nu, self.zeta, self.grid_width) <= 0:
            raise ValueError("nu, zeta and grid_width must be positive")


@dataclass(frozen=True)
class MicroRealization:
    """A sampled layout and the piecewise constant data it induces.

    ``edges`` partitions the domain into segments whose states are
    ``(rho, u, p)`` and whose phase index is ``phase``; segments are split at
    phase changes and at macro-cell edges where the phase state changes.
    """

    layout: PhaseLayout
    edges: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    p: np.ndarray
    phase: np.ndarray
    stream: tuple


class SampleStreams:
    """Independent random streams of one sample, one per cell.

    Streams are Philox generators keyed by ``(seed, sample, cell)`` through
    ``SeedSequence`` spawn keys.
    """

    def __init__(self, seed: int, sample: int):
        self.seed = int(seed)
        self.sample = int(sample)

    def cell(self, i: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.sample, int(i)))
        return np.random.Generator(np.random.Philox(ss))

    def field(self) -> np.random.Generator:
        """Stream for whole-domain draws such as a GP sample."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.sample, 2**32))
        return np.random.Generator(np.random.Philox(ss))


def round_half_away(x):
    """Round to nearest, ties away from zero."""
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def subcell_counts(alpha: float, n: int) -> tuple[int, int]:
    """Phase-1 and phase-2 sub-cell counts; they always add up to ``n``."""
    n1 = int(round_half_away(alpha * n))
    n1 = min(max(n1, 0), n)
    return n1, n - n1


def _cell_phases(alpha: float, n: int, rng: np.random.Generator) -> np.ndarray:
    n1, _ = subcell_counts(alpha, n)
    ph = np.ones(n, dtype=np.int64)
    if n1 == n:
        ph[:] = 0
    elif n1 > 0:
        ph[rng.permutation(n)[:n1]] = 0
    return ph


def _segments(cells: Sequence[MacroCellSpec], sub_edges, sub_phase, sub_cell):
    """Merge sub-cells into segments of constant phase and state."""
    rho = np.array([[c.states[k].state.rho for k in (0, 1)] for c in cells])
    u = np.array([[c.states[k].state.u for k in (0, 1)] for c in cells])
    p = np.array([[c.states[k].state.p for k in (0, 1)] for c in cells])
    r_s, u_s, p_s = (a[sub_cell, sub_phase] for a in (rho, u, p))
    n = len(sub_phase)
    brk = np.ones(n, dtype=bool)
    brk[1:] = ((sub_phase[1:] != sub_phase[:-1]) | (r_s[1:] != r_s[:-1])
               | (u_s[1:] != u_s[:-1]) | (p_s[1:] != p_s[:-1]))
    idx = np.flatnonzero(brk)
    edges = np.concatenate((sub_edges[idx], sub_edges[-1:]))
    ph = sub_phase[idx]
    change = np.ones(n, dtype=bool)
    change[1:] = sub_phase[1:] != sub_phase[:-1]
    lidx = np.flatnonzero(change)
    layout = PhaseLayout(np.concatenate((sub_edges[lidx], sub_edges[-1:])), sub_phase[lidx])
    return layout, edges, r_s[idx], u_s[idx], p_s[idx], ph


def generate_uniform(cells: Sequence[MacroCellSpec], n_sub: int, streams, mode: str = "uniform"
                     ) -> MicroRealization:
    """Equispaced sub-cell sampler.

    Parameters
    ----------
    cells : sequence of MacroCellSpec
        Adjacent macro cells, left to right.
    n_sub : int
        Sub-cells per cell (``uniform``) or their upper bound (``random``).
    streams : SampleStreams or numpy.random.Generator
        Per-cell random streams; a single Generator is shared by all cells.
    mode : {"uniform", "random"}

    Returns
    -------
    MicroRealization
    """
    if n_sub < 1:
        raise ValueError("n_sub must be at least 1")
    if mode not in ("uniform", "random"):
        raise ValueError(f"unknown sub-volume mode {mode!r}")
    edges, phases, owner = [], [], []
    for i, c in enumerate(cells):
        rng = streams.cell(i) if isinstance(streams, SampleStreams) else streams
        n = int(rng.integers(1, n_sub + 1)) if mode == "random" else n_sub
        ph = _cell_phases(c.alpha, n, rng)
        edges.append(c.lo + (c.hi - c.lo) * np.arange(n) / n)
        phases.append(ph)
        owner.append(np.full(n, i, dtype=np.int64))
    sub_edges = np.concatenate(edges + [np.array([cells[-1].hi])])
    tag = (streams.seed, streams.sample) if isinstance(streams, SampleStreams) else ()
    layout, e, r, u, p, ph = _segments(cells, sub_edges, np.concatenate(phases), np.concatenate(owner))
    return MicroRealization(layout, e, r, u, p, ph, tag)


def realized_fraction(layout: PhaseLayout, lo: float, hi: float, k: int) -> float:
    """Fraction of ``[lo, hi]`` occupied by phase ``k`` (0 or 1)."""
    b = layout.breakpoints
    left = np.clip(b[:-1], lo, hi)
    right = np.clip(b[1:], lo, hi)
    length = np.where(layout.phase == k, right - left, 0.0).sum()
    return float(length / (hi - lo))


def matern_kernel(x, y, nu: float, zeta: float):
    """Matérn covariance ``2^(1-nu)/Gamma(nu) z^nu K_nu(z)``, ``z = sqrt(2 nu) |x - y| / zeta``.

    Equals 1 at ``x = y``.
    """
    d = np.abs(np.asarray(x, float) - np.asarray(y, float))
    z = math.sqrt(2.0 * nu) * d / zeta
    with np.errstate(invalid="ignore", over="ignore"):
        val = 2.0 ** (1.0 - nu) / special.gamma(nu) * z**nu * special.kv(nu, z)
    val = np.where(z == 0.0, 1.0, np.nan_to_num(val, nan=0.0))
    return float(val) if val.ndim == 0 else val


def gp_mean_from_alpha(alpha):
    """Mean shift ``sqrt(2) erfinv(2 alpha - 1)`` giving ``P(g >= 0) = alpha``.

    Raises
    ------
    ValueError
        At ``alpha`` in {0, 1}, where the mean is infinite.
    """
    a = np.asarray(alpha, float)
    if np.any((a <= 0.0) | (a >= 1.0)):
        raise ValueError("alpha must lie strictly between 0 and 1")
    mu = math.sqrt(2.0) * special.erfinv(2.0 * a - 1.0)
    return float(mu) if mu.ndim == 0 else mu


def gp_alpha(mu):
    """Inverse of :func:`gp_mean_from_alpha`."""
    out = 0.5 * (1.0 + special.erf(np.asarray(mu, float) / math.sqrt(2.0)))
    return float(out) if out.ndim == 0 else out


@functools.lru_cache(maxsize=16)
def _cholesky(n: int, width: float, nu: float, zeta: float, jitter: float) -> np.ndarray:
    x = width * np.arange(n)
    cov = matern_kernel(x[:, None], x[None, :], nu, zeta)
    cov[np.diag_indices(n)] += jitter * float(np.max(np.diag(cov)))
    try:
        return linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError as exc:
        raise FactorizationError("Matérn covariance not positive definite after jitter") from exc


def _gp_phases(alpha_grid: np.ndarray, gp: GpConfig, rng: np.random.Generator) -> np.ndarray:
    a = np.asarray(alpha_grid, float)
    pure1 = a >= 1.0 - PURE_TOL
    pure2 = a <= PURE_TOL
    if np.all(pure1 | pure2):
        return np.where(pure1, 0, 1).astype(np.int64)
    mu = np.zeros_like(a)
    mixed = ~(pure1 | pure2)
    mu[mixed] = gp_mean_from_alpha(a[mixed])
    mu[pure1] = np.inf
    mu[pure2] = -np.inf
    chol = _cholesky(len(a), float(gp.grid_width), float(gp.nu), float(gp.zeta), float(gp.jitter))
    g = mu + chol @ rng.standard_normal(len(a))
    return np.where(g >= 0.0, 0, 1).astype(np.int64)


def generate_gp(cells: Sequence[MacroCellSpec], gp: GpConfig, streams) -> MicroRealization:
    """Level-set sampler on a grid of spacing ``gp.grid_width``.

    Grid points sit at the centers of equal intervals spanning the domain;
    each interval takes the phase of its point, so interfaces fall on the
    midpoints between points of opposite sign.
    """
    lo, hi = cells[0].lo, cells[-1].hi
    n = max(1, int(round((hi - lo) / gp.grid_width)))
    grid_edges = lo + (hi - lo) * np.arange(n + 1) / n
    centers = 0.5 * (grid_edges[1:] + grid_edges[:-1])
    cell_edges = np.array([c.lo for c in cells] + [hi])
    owner = np.clip(np.searchsorted(cell_edges, centers, "right") - 1, 0, len(cells) - 1)
    alpha = np.array([c.alpha for c in cells])[owner]
    rng = streams.field() if isinstance(streams, SampleStreams) else streams
    phase = _gp_phases(alpha, _with_width(gp, (hi - lo) / n), rng)
    # split grid intervals at macro-cell edges so every piece has one owner
    pts = np.union1d(grid_edges, cell_edges)
    mid = 0.5 * (pts[1:] + pts[:-1])
    gidx = np.clip(np.searchsorted(grid_edges, mid, "right") - 1, 0, n - 1)
    cidx = np.clip(np.searchsorted(cell_edges, mid, "right") - 1, 0, len(cells) - 1)
    tag = (streams.seed, streams.sample) if isinstance(streams, SampleStreams) else ()
    layout, e, r, u, p, ph = _segments(cells, pts, phase[gidx], cidx)
    return MicroRealization(layout, e, r, u, p, ph, tag)


def _with_width(gp: GpConfig, width: float) -> GpConfig:
    return GpConfig(gp.nu, gp.zeta, width, gp.jitter)


def layout_count(n: int, n1: int) -> int:
    """Number of distinct equispaced layouts of one cell: ``C(n, n1)``."""
    return math.comb(n, n1)


def enumerate_layouts(n: int, n1: int) -> list[tuple[int, ...]]:
    """All phase-1 index sets of size ``n1`` among ``n`` sub-cells (small ``n`` only)."""
    if n > 20:
        raise ValueError("exhaustive enumeration is limited to n <= 20")
    return list(itertools.combinations(range(n), n1))


def dump_layout_csv(layout: PhaseLayout, path) -> None:
    """Write ``(breakpoint, phase)`` rows; phases are numbered 1 and 2."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["breakpoint", "phase"])
        for x, ph in zip(layout.breakpoints[:-1], layout.phase):
            w.writerow([repr(float(x)), int(ph) + 1])
        w.writerow([repr(float(layout.breakpoints[-1])), ""])
