"""Monte-Carlo ensemble driver.

Every sample draws an initial microstructure from its own random streams,
is evolved by front tracking with resampling, and is projected onto the
macro mesh at each output time. The projected fields are accumulated with
Welford's update in sample-index order, whatever the number of workers, so
results do not depend on the schedule.
"""
from __future__ import annotations

import multiprocessing as mp
import os
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .front_tracking import CellAverages, FtConfig, init_from_segments, track
from .microscale import GpConfig, MacroCellSpec, SampleStreams, generate_gp, generate_uniform
from .stats import FavreStats, WelfordAccumulator, favre_finalize

__all__ = [
    "EnsembleConfig",
    "EnsembleResult",
    "SampleFailure",
    "run_ensemble",
    "run_sample",
    "estimate_interface_density",
    "coalesce_cells",
    "cell_edges",
]

SAMPLERS = ("uniform", "random", "gp")


class SampleFailure(RuntimeError):
    """A sample failed; carries the seed and index needed to replay it."""

    def __init__(self, seed: int, sample: int, cause: BaseException):
        super().__init__(f"sample {sample} (seed {seed}) failed: {type(cause).__name__}: {cause}")
        self.seed = seed
        self.sample = sample
        self.cause = cause

    def __reduce__(self):
        return (SampleFailure, (self.seed, self.sample, self.cause))


@dataclass(frozen=True)
class EnsembleConfig:
    """Monte-Carlo run description.

    Parameters
    ----------
    cells : sequence of MacroCellSpec
        Adjacent macro cells with their initial data; they define the mesh.
    n_samples : int
        Number of samples ``L``.
    T : float
        Final time.
    ft : FtConfig
    sampler : {"uniform", "random", "gp"}
    n_sub : int
        Sub-volumes per cell (uniform) or their upper bound (random).
    gp : GpConfig
        Settings of the Gaussian-process sampler.
    seed : int
        Master seed.
    output_times : tuple of float
        Times at which statistics are recorded; ``T`` is always included.
    snapshots : tuple of int
        Sample counts at which intermediate statistics are also kept, for
        nested sample-size studies from a single run.
    """

    cells: tuple
    n_samples: int
    T: float
    ft: FtConfig = field(default_factory=FtConfig)
    sampler: str = "uniform"
    n_sub: int = 128
    gp: GpConfig = field(default_factory=GpConfig)
    seed: int = 0
    output_times: tuple = ()
    snapshots: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        if not self.cells:
            raise ValueError("at least one cell is required")
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if self.sampler not in SAMPLERS:
            raise ValueError(f"sampler must be one of {SAMPLERS}")
        times = sorted({float(t) for t in self.output_times if 0 <= t <= self.T} | {float(self.T)})
        object.__setattr__(self, "output_times", tuple(times))
        object.__setattr__(self, "snapshots", tuple(sorted({int(s) for s in self.snapshots
                                                            if 0 < s <= self.n_samples})))

    @property
    def edges(self) -> np.ndarray:
        return cell_edges(self.cells)

    @property
    def phases(self):
        c = self.cells[0]
        return (c.states[0].params, c.states[1].params)


@dataclass
class EnsembleResult:
    """Statistics of an ensemble run.

    Attributes
    ----------
    stats : dict of float to FavreStats
        Statistics at each output time.
    interface_density : dict of float to ndarray
        Estimated mean number of material interfaces per unit length in
        each cell.
    snapshots : dict of int to dict of float to FavreStats
        Statistics after the first ``n`` samples.
    collisions : ndarray of int
        Collisions resolved by each sample.
    """

    edges: np.ndarray
    stats: dict
    interface_density: dict
    snapshots: dict
    collisions: np.ndarray
    wall_time: float
    n_blocks: int


def cell_edges(cells: Sequence[MacroCellSpec]) -> np.ndarray:
    edges = np.array([c.lo for c in cells] + [cells[-1].hi], dtype=float)
    if np.any(np.diff(edges) <= 0):
        raise ValueError("cells must be sorted and non-overlapping")
    for a, b in zip(cells[:-1], cells[1:]):
        if a.hi != b.lo:
            raise ValueError("cells must be adjacent")
    return edges


def coalesce_cells(cells: Sequence[MacroCellSpec]) -> list[tuple[int, int]]:
    """Blocks ``[start, stop)`` of adjacent cells with identical initial data.

    Sub-volumes are still drawn per macro cell, so the per-cell fraction
    constraint holds; the blocks only let neighboring sub-volumes that
    carry the same phase and state merge into one initial segment.
    """
    blocks = []
    start = 0
    for i in range(1, len(cells) + 1):
        if i == len(cells) or (cells[i].alpha, cells[i].states) != (cells[start].alpha, cells[start].states):
            blocks.append((start, i))
            start = i
    return blocks


def estimate_interface_density(layouts, edges) -> np.ndarray:
    """Mean number of phase interfaces per unit length in each cell.

    Parameters
    ----------
    layouts : iterable of PhaseLayout
    edges : array_like, shape (M + 1,)
    """
    edges = np.asarray(edges, float)
    M = len(edges) - 1
    total = np.zeros(M)
    n = 0
    for lay in layouts:
        x = lay.interfaces
        idx = np.clip(np.searchsorted(edges, x, "right") - 1, 0, M - 1)
        total += np.bincount(idx, minlength=M)
        n += 1
    if n == 0:
        raise ValueError("at least one layout is required")
    return total / n / np.diff(edges)


def _realize(cfg: EnsembleConfig, sample: int):
    streams = SampleStreams(cfg.seed, sample)
    if cfg.sampler == "gp":
        return generate_gp(cfg.cells, cfg.gp, streams)
    return generate_uniform(cfg.cells, cfg.n_sub, streams, mode=cfg.sampler)


def run_sample(cfg: EnsembleConfig, sample: int):
    """Evolve one sample.

    Returns
    -------
    fields : ndarray, shape (n_times, 6, M, 2)
        Projected fields in the order of ``CellAverages.FIELDS``.
    interfaces : ndarray, shape (n_times, M)
        Material interface counts per cell.
    n_collisions : int
    """
    edges = cfg.edges
    real = _realize(cfg, sample)
    fronts = init_from_segments(real.edges, real.rho, real.u, real.p, real.phase, cfg.phases, cfg.ft)
    final, out = track(fronts, edges, cfg.T, cfg.ft, output_times=cfg.output_times)
    fields = np.stack([out[t].stack() for t in cfg.output_times])
    inter = np.stack([out[t].interfaces for t in cfg.output_times])
    return fields, inter, int(final.n_collisions)


_WORKER_CFG: EnsembleConfig | None = None


def _init_worker(cfg):
    global _WORKER_CFG
    _WORKER_CFG = cfg


def _guarded(cfg, sample):
    try:
        return run_sample(cfg, sample)
    except Exception as exc:  # re-raised with replay information
        raise SampleFailure(cfg.seed, sample, exc) from exc


def _pool_task(sample):
    return _guarded(_WORKER_CFG, sample)


def _finalize(acc, inter, times, dx):
    stats, dens = {}, {}
    for j, t in enumerate(times):
        products = {name: acc[j][k] for k, name in enumerate(CellAverages.FIELDS) if k > 0}
        stats[t] = favre_finalize(acc[j][0], products)
        dens[t] = inter[j].mean / dx
    return stats, dens


def default_workers() -> int:
    """Worker count from ``ABINITIO_WORKERS``, else 1."""
    return max(1, int(os.environ.get("ABINITIO_WORKERS", "1")))


def run_ensemble(cfg: EnsembleConfig, workers: int | None = None) -> EnsembleResult:
    """Run all samples and accumulate their statistics.

    Parameters
    ----------
    workers : int, optional
        Number of processes. Defaults to :func:`default_workers`.

    Raises
    ------
    SampleFailure
        On the first failing sample, with its seed and index.
    """
    workers = default_workers() if workers is None else max(1, int(workers))
    t0 = time.perf_counter()
    edges = cfg.edges
    M = len(edges) - 1
    times = cfg.output_times
    acc = [[WelfordAccumulator.empty((M, 2)) for _ in CellAverages.FIELDS] for _ in times]
    inter = [WelfordAccumulator.empty(M) for _ in times]
    collisions = np.zeros(cfg.n_samples, dtype=np.int64)
    snaps = {}
    dx = np.diff(edges)

    def consume(i, res):
        fields, counts, ncoll = res
        collisions[i] = ncoll
        for j in range(len(times)):
            for k in range(len(CellAverages.FIELDS)):
                acc[j][k].update(fields[j, k])
            inter[j].update(counts[j])
        if i + 1 in cfg.snapshots:
            snaps[i + 1] = _finalize(acc, inter, times, dx)[0]

    samples = range(cfg.n_samples)
    if workers == 1:
        for i in samples:
            consume(i, _guarded(cfg, i))
    else:
        ctx = mp.get_context("fork")
        with ctx.Pool(workers, initializer=_init_worker, initargs=(cfg,)) as pool:
            for i, res in enumerate(pool.imap(_pool_task, samples, chunksize=1)):
                consume(i, res)
    stats, dens = _finalize(acc, inter, times, dx)
    return EnsembleResult(edges, stats, dens, snaps, collisions, time.perf_counter() - t0,
                          len(coalesce_cells(cfg.cells)))
