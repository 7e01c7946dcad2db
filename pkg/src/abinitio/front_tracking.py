"""Front tracking for the two-material Euler system.

The solution is piecewise constant in space. Every discontinuity (front)
moves with constant speed until it meets a neighbor. The Riemann problem
between the outermost colliding states is then solved again and
discretized into new fronts. Rarefactions are replaced by fans of
``ceil(strength / delta)`` jumps moving at the characteristic speed of their
left state.

Periodically the solution is projected onto a fixed mesh. Each cell is
averaged separately over its maximal same-phase runs, which keeps material
interfaces sharp and the projection conservative. Fronts are then
regenerated from the averaged data. :func:`track` runs this
evolve-then-resample loop.

Boundaries are transmissive. Fronts reaching the domain ends are removed
and the fluxes through both ends are integrated, so that conservation can
be checked with waves leaving the domain.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import _ft_kernel as K
from .eos import EosDomainError, EosParams, VACUUM_TOL
from .riemann import FullState, raise_for_status

__all__ = [
    "FtConfig",
    "Front",
    "FrontConfiguration",
    "CellAverages",
    "PhaseLayout",
    "CollisionCascadeError",
    "FRONT_KINDS",
    "init_fronts",
    "init_from_segments",
    "evolve",
    "project",
    "resample",
    "stepper",
    "track",
    "dump_fronts_csv",
]

FRONT_KINDS = {K.SHOCK: "shock", K.CONTACT: "contact", K.FAN: "rarefaction"}


class CollisionCascadeError(RuntimeError):
    """Raised when a sample exceeds its collision budget."""


@dataclass(frozen=True)
class FtConfig:
    """Front tracking parameters.

    Parameters
    ----------
    delta : (float, float)
        Rarefaction discretization accuracy for phase 1 and phase 2.
    cfl : float or None
        CFL number of the resampling stepper. Ignored if ``resample_steps``
        is set.
    resample_steps : int or None
        Number of equispaced resampling steps over ``[0, T]``. With both
        ``cfl`` and ``resample_steps`` unset, the solution is resampled only
        at output times.
    min_front_strength : float
        Waves weaker than this (in the state norm) are not created.
    max_collisions : int
        Collision budget per sample.
    """

    delta: tuple[float, float] = (0.05, 0.05)
    cfl: float | None = None
    resample_steps: int | None = None
    min_front_strength: float = 1e-11
    max_collisions: int = 10**7

    def __post_init__(self):
        d = tuple(float(v) for v in np.broadcast_to(np.asarray(self.delta, float), (2,)))
        object.__setattr__(self, "delta", d)
        if min(d) <= 0:
            raise ValueError("delta must be positive")
        if self.cfl is not None and not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if self.resample_steps is not None and self.resample_steps < 1:
            raise ValueError("resample_steps must be at least 1")


@dataclass(frozen=True)
class Front:
    """Read-only view of one front."""

    position: float
    speed: float
    left_state: FullState
    right_state: FullState
    kind: str
    family: int

    @property
    def is_material_interface(self) -> bool:
        return self.left_state.params != self.right_state.params


@dataclass
class FrontConfiguration:
    """Front tracking solution at one time.

    Fronts are stored column-wise in left-to-right order. ``rho``, ``u``,
    ``p`` and ``phase`` hold the state on the right of each front; the state
    left of the first front is ``left``.

    Attributes
    ----------
    boundary_flux : ndarray, shape (2, 3)
        Time integral of the net inflow of (mass, momentum, energy) per
        phase through both domain ends since the start of the run.
    n_collisions : int
        Collisions resolved since the start of the run.
    """

    x: np.ndarray
    speed: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    p: np.ndarray
    phase: np.ndarray
    kind: np.ndarray
    family: np.ndarray
    left: tuple[float, float, float, int]
    time: float
    domain: tuple[float, float]
    phases: tuple[EosParams, EosParams]
    boundary_flux: np.ndarray = field(default_factory=lambda: np.zeros((2, 3)))
    n_collisions: int = 0
    bc: str = "transmissive"

    def __len__(self) -> int:
        return int(self.x.shape[0])

    def _full(self, rho, u, p, ph) -> FullState:
        return FullState.of(rho, u, p, self.phases[int(ph)])

    @property
    def fronts(self) -> list[Front]:
        out = []
        lr, lu, lp, lph = self.left
        for k in range(len(self)):
            left = self._full(lr, lu, lp, lph)
            right = self._full(self.rho[k], self.u[k], self.p[k], self.phase[k])
            out.append(Front(float(self.x[k]), float(self.speed[k]), left, right,
                             FRONT_KINDS[int(self.kind[k])], int(self.family[k])))
            lr, lu, lp, lph = self.rho[k], self.u[k], self.p[k], self.phase[k]
        return out

    def segment_states(self):
        """States of the ``len(self) + 1`` constant segments as arrays."""
        lr, lu, lp, lph = self.left
        return (np.concatenate(([lr], self.rho)), np.concatenate(([lu], self.u)),
                np.concatenate(([lp], self.p)), np.concatenate(([lph], self.phase)).astype(np.int64))

    def material_interfaces(self) -> np.ndarray:
        """Positions of fronts across which the phase changes."""
        ph = self.segment_states()[3]
        return self.x[ph[1:] != ph[:-1]]

    def total_variation(self) -> float:
        """Sum over fronts of the relative jump in (rho, u, p)."""
        r, u, p, _ = self.segment_states()
        if len(r) < 2:
            return 0.0
        d = np.abs(np.diff(r)) / np.maximum(r[1:], r[:-1])
        d += np.abs(np.diff(u)) + np.abs(np.diff(p))
        return float(d.sum())

    def totals(self) -> np.ndarray:
        """Domain integrals of (mass, momentum, energy) per phase, shape (2, 3)."""
        xa, xb = self.domain
        bounds = np.concatenate(([xa], np.clip(self.x, xa, xb), [xb]))
        lengths = np.diff(bounds)
        r, u, p, ph = self.segment_states()
        q = _conserved(r, u, p, ph, self.phases)
        out = np.zeros((2, 3))
        for k in range(2):
            m = ph == k
            out[k] = (lengths[m, None] * q[m]).sum(axis=0)
        return out


def _eos_table(phases) -> np.ndarray:
    return np.array([k.as_tuple() for k in phases], dtype=float)


def _conserved(r, u, p, ph, phases) -> np.ndarray:
    eos = _eos_table(phases)
    g, pi, b = eos[ph, 0], eos[ph, 1], eos[ph, 2]
    E = (p + g * pi) * (1.0 - b * r) / (g - 1.0) + 0.5 * r * u * u
    return np.stack([r, r * u, E], axis=-1)


def _primitive(q, ph, phases):
    eos = _eos_table(phases)
    g, pi, b = eos[ph, 0], eos[ph, 1], eos[ph, 2]
    r = q[:, 0]
    if np.any(~(r >= VACUUM_TOL)):
        raise EosDomainError("averaged density below vacuum threshold")
    u = q[:, 1] / r
    p = (g - 1.0) * (q[:, 2] - 0.5 * r * u * u) / (1.0 - b * r) - g * pi
    if np.any(~(p + pi >= VACUUM_TOL)):
        raise EosDomainError("averaged state below vacuum threshold")
    return r, u, p


# ---------------------------------------------------------------------------
# workspace around the compiled kernels
# ---------------------------------------------------------------------------


class _Workspace:
    def __init__(self, phases, ft: FtConfig, domain, capacity=256):
        self.eos = _eos_table(phases)
        self.delta = np.array(ft.delta, dtype=float)
        self.ft = ft
        self.F = np.zeros((capacity, 6))
        self.I = np.zeros((capacity, 6), dtype=np.int64)
        self.G = np.zeros(8)
        self.GI = np.zeros(8, dtype=np.int64)
        self.G[K.G_XA], self.G[K.G_XB] = domain
        m = 64 + 2 * int(np.ceil(20.0 / min(ft.delta)))
        self.sf = np.zeros((m, 4))
        self.si = np.zeros((m, 3), dtype=np.int64)
        self.bflux = np.zeros((2, 3))

    def set_left(self, r, u, p, ph):
        self.G[K.G_LRHO], self.G[K.G_LU], self.G[K.G_LP] = r, u, p
        self.GI[K.GI_LPH] = ph

    def reset(self, t, n_collisions, bflux):
        self.G[K.G_TNOW] = self.G[K.G_TL] = self.G[K.G_TR] = t
        self.GI[K.GI_HEAD] = self.GI[K.GI_TAIL] = -1
        self.GI[K.GI_NUSED] = 0
        self.GI[K.GI_NCOLL] = n_collisions
        self.GI[K.GI_PROG] = 0
        self.bflux[:] = bflux

    def load(self, cfg: FrontConfiguration):
        n = len(cfg)
        self.reset(cfg.time, cfg.n_collisions, cfg.boundary_flux)
        self.set_left(*cfg.left)
        self._ensure(n)
        F, I = self.F, self.I
        F[:n, K.X0] = cfg.x
        F[:n, K.T0] = cfg.time
        F[:n, K.SPD] = cfg.speed
        F[:n, K.RHO] = cfg.rho
        F[:n, K.VEL] = cfg.u
        F[:n, K.PRS] = cfg.p
        I[:n, K.PH] = cfg.phase
        I[:n, K.KIND] = cfg.kind
        I[:n, K.FAM] = cfg.family
        I[:n, K.PREV] = np.arange(-1, n - 1)
        I[:n, K.NEXT] = np.arange(1, n + 1)
        I[:n, K.ALIVE] = 1
        if n:
            I[n - 1, K.NEXT] = -1
            self.GI[K.GI_HEAD], self.GI[K.GI_TAIL] = 0, n - 1
        self.GI[K.GI_NUSED] = n

    def _ensure(self, n):
        if n > self.F.shape[0]:
            cap = max(n, 2 * self.F.shape[0])
            self.F = np.zeros((cap, 6))
            self.I = np.zeros((cap, 6), dtype=np.int64)

    def make_room(self):
        live = K.count_live(self.I, self.GI)
        cap = self.F.shape[0]
        if live > cap // 2:
            cap *= 2
        F2 = np.zeros((cap, 6))
        I2 = np.zeros((cap, 6), dtype=np.int64)
        K.compact(self.F, self.I, self.GI, self.G[K.G_TNOW], F2, I2)
        self.F, self.I = F2, I2

    def handle(self, status, where):
        if status == K.FULL:
            self.make_room()
        elif status == K.SCRATCH:
            m = 2 * self.sf.shape[0]
            self.sf = np.zeros((m, 4))
            self.si = np.zeros((m, 3), dtype=np.int64)
        elif status == K.CASCADE:
            raise CollisionCascadeError(
                f"collision budget of {self.ft.max_collisions} exhausted at t={self.G[K.G_TNOW]:.6g}")
        else:
            raise_for_status(int(status), where)

    def to_config(self, phases, domain, t) -> FrontConfiguration:
        n = K.count_live(self.I, self.GI)
        of = np.empty((n, 5))
        oi = np.empty((n, 3), dtype=np.int64)
        K.collect(self.F, self.I, self.GI, t, of, oi)
        left = (float(self.G[K.G_LRHO]), float(self.G[K.G_LU]), float(self.G[K.G_LP]), int(self.GI[K.GI_LPH]))
        return FrontConfiguration(
            x=of[:, 0], speed=of[:, 1], rho=of[:, 2], u=of[:, 3], p=of[:, 4],
            phase=oi[:, 0], kind=oi[:, 1], family=oi[:, 2], left=left, time=float(t),
            domain=tuple(map(float, domain)), phases=tuple(phases),
            boundary_flux=self.bflux.copy(), n_collisions=int(self.GI[K.GI_NCOLL]))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def init_from_segments(edges, rho, u, p, phase, phases, ft: FtConfig, t0: float = 0.0,
                       n_collisions: int = 0, boundary_flux=None) -> FrontConfiguration:
    """Fronts for piecewise constant data on the partition ``edges``.

    Parameters
    ----------
    edges : ndarray, shape (n + 1,)
        Increasing breakpoints; the first and last are the domain ends.
    rho, u, p : ndarray, shape (n,)
        Primitive state of each segment.
    phase : ndarray of int, shape (n,)
        Phase index (0 or 1) of each segment, into ``phases``.
    """
    edges = np.asarray(edges, dtype=float)
    rho, u, p = (np.ascontiguousarray(a, dtype=float) for a in (rho, u, p))
    phase = np.ascontiguousarray(phase, dtype=np.int64)
    if len(edges) != len(rho) + 1 or len(rho) < 1:
        raise ValueError("edges must have one more entry than the segment states")
    ws = _Workspace(phases, ft, (edges[0], edges[-1]), capacity=max(64, 4 * len(rho)))
    ws.reset(t0, n_collisions, np.zeros((2, 3)) if boundary_flux is None else boundary_flux)
    ws.set_left(rho[0], u[0], p[0], phase[0])
    inner = np.ascontiguousarray(edges[1:-1])
    while True:
        st = K.init_kernel(ws.F, ws.I, ws.G, ws.GI, ws.eos, ws.delta, ft.min_front_strength,
                           inner, rho, u, p, phase, t0, ws.sf, ws.si)
        if st == K.DONE:
            break
        ws.handle(st, "init")
    return ws.to_config(phases, (edges[0], edges[-1]), t0)


def _phase_table(states: Sequence[FullState]):
    phases: list[EosParams] = []
    for s in states:
        if s.params not in phases:
            phases.append(s.params)
    if len(phases) > 2:
        raise ValueError("at most two materials are supported")
    if len(phases) == 1:
        phases.append(phases[0])
    return tuple(phases)


def init_fronts(edges, states: Sequence[FullState], ft: FtConfig, phases=None, t0: float = 0.0):
    """Fronts for per-cell constant data.

    One Riemann problem is solved at every cell boundary with a state jump.

    Parameters
    ----------
    edges : array_like, shape (M + 1,)
        Cell edges.
    states : sequence of FullState, length M
    ft : FtConfig
    phases : (EosParams, EosParams), optional
        Material table. Defaults to the distinct parameter records in order
        of appearance.
    """
    phases = tuple(phases) if phases is not None else _phase_table(states)
    ph = np.array([phases.index(s.params) for s in states], dtype=np.int64)
    r = np.array([s.state.rho for s in states], dtype=float)
    u = np.array([s.state.u for s in states], dtype=float)
    p = np.array([s.state.p for s in states], dtype=float)
    for s in states:
        s.state.check(s.params)
    return init_from_segments(edges, r, u, p, ph, phases, ft, t0)


def evolve(config: FrontConfiguration, t_out: float, ft: FtConfig) -> FrontConfiguration:
    """Advance the fronts to ``t_out``, resolving collisions in time order.

    Raises
    ------
    CollisionCascadeError
        If the cumulative collision count exceeds ``ft.max_collisions``.
    VacuumError, ConvergenceError
        From the Riemann solver.
    """
    if t_out < config.time:
        raise ValueError("t_out precedes the configuration time")
    if t_out == config.time:
        return config
    ws = _Workspace(config.phases, ft, config.domain, capacity=max(64, 2 * len(config)))
    ws.load(config)
    while True:
        st = K.evolve_kernel(ws.F, ws.I, ws.G, ws.GI, ws.eos, ws.delta, ws.bflux,
                             ft.min_front_strength, ft.max_collisions, float(t_out), ws.sf, ws.si)
        if st == K.DONE:
            break
        ws.handle(st, "evolve")
    return ws.to_config(config.phases, config.domain, t_out)


@dataclass
class CellAverages:
    """Per-cell, per-phase averages of characteristic-function-weighted fields.

    Every array has shape ``(M, 2)``. ``alpha`` is the phase fraction and
    ``X<q>`` is the cell average of ``X q``.
    """

    alpha: np.ndarray
    Xrho: np.ndarray
    Xmom: np.ndarray
    Xener: np.ndarray
    Xu: np.ndarray
    Xp: np.ndarray
    interfaces: np.ndarray

    FIELDS = ("alpha", "Xrho", "Xmom", "Xener", "Xu", "Xp")

    def stack(self) -> np.ndarray:
        """Fields stacked along a leading axis, shape (6, M, 2)."""
        return np.stack([getattr(self, f) for f in self.FIELDS])


@dataclass(frozen=True)
class PhaseLayout:
    """Interval partition of the domain tagged by phase index (0 or 1)."""

    breakpoints: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        if len(self.breakpoints) != len(self.phase) + 1:
            raise ValueError("need one more breakpoint than intervals")

    @property
    def interfaces(self) -> np.ndarray:
        return self.breakpoints[1:-1]

    def fractions(self, edges) -> np.ndarray:
        """Per-cell fractions of both phases, shape (M, 2)."""
        edges = np.asarray(edges, float)
        pts = np.union1d(edges, self.breakpoints)
        pts = pts[(pts >= edges[0]) & (pts <= edges[-1])]
        lengths = np.diff(pts)
        mid = pts[:-1] + 0.5 * lengths
        ph = self.phase[np.clip(np.searchsorted(self.breakpoints, mid, "right") - 1, 0, len(self.phase) - 1)]
        cell = np.clip(np.searchsorted(edges, mid, "right") - 1, 0, len(edges) - 2)
        M = len(edges) - 1
        out = np.zeros((M, 2))
        np.add.at(out, (cell, ph), lengths)
        return out / np.diff(edges)[:, None]


def _pieces(config: FrontConfiguration, edges):
    xa, xb = config.domain
    x = np.clip(config.x, xa, xb)
    pts = np.concatenate((edges, x))
    pts.sort(kind="mergesort")
    lengths = np.diff(pts)
    keep = lengths > 0
    lengths = lengths[keep]
    mid = pts[:-1][keep] + 0.5 * lengths
    start = pts[:-1][keep]
    seg = np.searchsorted(x, mid, "right")
    cell = np.clip(np.searchsorted(edges, mid, "right") - 1, 0, len(edges) - 2)
    return start, lengths, mid, seg, cell


def project(config: FrontConfiguration, edges) -> CellAverages:
    """Cell averages of the characteristic-function-weighted fields."""
    edges = np.asarray(edges, dtype=float)
    M = len(edges) - 1
    dx = np.diff(edges)
    _, lengths, _, seg, cell = _pieces(config, edges)
    r, u, p, ph = config.segment_states()
    r, u, p, ph = r[seg], u[seg], p[seg], ph[seg]
    q = _conserved(r, u, p, ph, config.phases)
    key = 2 * cell + ph
    out = {}
    for name, vals in (("alpha", np.ones_like(r)), ("Xrho", q[:, 0]), ("Xmom", q[:, 1]),
                       ("Xener", q[:, 2]), ("Xu", u), ("Xp", p)):
        out[name] = np.bincount(key, weights=lengths * vals, minlength=2 * M).reshape(M, 2) / dx[:, None]
    mat = config.material_interfaces()
    icell = np.clip(np.searchsorted(edges, mat, "right") - 1, 0, M - 1)
    out["interfaces"] = np.bincount(icell, minlength=M).astype(float)
    return CellAverages(**out)


def layout_of(config: FrontConfiguration) -> PhaseLayout:
    """Phase layout of a configuration."""
    xa, xb = config.domain
    ph = config.segment_states()[3]
    change = np.flatnonzero(ph[1:] != ph[:-1])
    bps = np.concatenate(([xa], np.clip(config.x[change], xa, xb), [xb]))
    phases = np.concatenate((ph[:1], ph[change + 1]))
    return PhaseLayout(bps, phases)


def resample(config: FrontConfiguration, edges, ft: FtConfig | None = None):
    """Conservative projection onto the mesh followed by front regeneration.

    Inside each cell the conserved variables are averaged separately over
    every maximal same-phase run. Material interfaces stay where they are;
    all other fronts are absorbed.

    Returns
    -------
    (CellAverages, PhaseLayout, FrontConfiguration)
    """
    edges = np.asarray(edges, dtype=float)
    ft = ft if ft is not None else FtConfig()
    averages = project(config, edges)
    start, lengths, mid, seg, cell = _pieces(config, edges)
    r, u, p, ph = config.segment_states()
    r, u, p, ph = r[seg], u[seg], p[seg], ph[seg]
    q = _conserved(r, u, p, ph, config.phases) * lengths[:, None]
    run = np.searchsorted(config.material_interfaces(), mid, "right")
    new = np.ones(len(lengths), dtype=bool)
    new[1:] = (cell[1:] != cell[:-1]) | (run[1:] != run[:-1])
    gid = np.cumsum(new) - 1
    ng = int(gid[-1]) + 1
    glen = np.bincount(gid, weights=lengths, minlength=ng)
    gq = np.stack([np.bincount(gid, weights=q[:, c], minlength=ng) for c in range(3)], axis=1)
    gq /= glen[:, None]
    gph = ph[new]
    gr, gu, gp = _primitive(gq, gph, config.phases)
    gedges = np.concatenate((start[new], [config.domain[1]]))
    gedges[0] = config.domain[0]
    new_cfg = init_from_segments(gedges, gr, gu, gp, gph, config.phases, ft, config.time,
                                 config.n_collisions, config.boundary_flux)
    return averages, layout_of(new_cfg), new_cfg


def stepper(config: FrontConfiguration, t: float, T: float, ft: FtConfig, dx: float | None = None) -> float:
    """Length of the next resampling step.

    Equispaced mode returns ``T / resample_steps``. CFL mode returns
    ``cfl * dx / max(|u| + a)`` over all constant states. Both are clipped so
    that the step never passes ``T``.
    """
    if not t < T:
        raise ValueError("t must precede T")
    if ft.resample_steps is not None:
        return min(T / ft.resample_steps, T - t)
    if ft.cfl is None or dx is None:
        return T - t
    r, u, p, ph = config.segment_states()
    eos = _eos_table(config.phases)
    g, pi, b = eos[ph, 0], eos[ph, 1], eos[ph, 2]
    a = np.sqrt(g * (p + pi) / ((1.0 - b * r) * r))
    smax = float(np.max(np.abs(u) + a))
    return min(ft.cfl * dx / smax, T - t)


def _schedule(T, ft: FtConfig, output_times):
    times = {float(t) for t in output_times if 0 < t <= T}
    times.add(float(T))
    if ft.resample_steps is not None:
        times.update(float(t) for t in np.linspace(0.0, T, ft.resample_steps + 1)[1:])
    return sorted(times)


def track(config: FrontConfiguration, edges, T: float, ft: FtConfig, output_times=(),
          on_output=None):
    """Front tracking with resampling on ``[config.time, T]``.

    The solution is resampled at every stepper time and at every output
    time. Outputs at ``t = 0`` are projections of the initial data.

    Parameters
    ----------
    on_output : callable, optional
        Called as ``on_output(t, averages, layout, config)`` at each output time.

    Returns
    -------
    (FrontConfiguration, dict)
        Final configuration and a mapping from output time to CellAverages.
    """
    edges = np.asarray(edges, dtype=float)
    dx = float(np.min(np.diff(edges)))
    outputs = sorted(float(t) for t in output_times)
    results = {}
    if outputs and outputs[0] <= config.time:
        avg = project(config, edges)
        results[outputs[0]] = avg
        if on_output is not None:
            on_output(outputs[0], avg, layout_of(config), config)
    fixed = _schedule(T, ft, outputs) if ft.cfl is None or ft.resample_steps is not None else None
    t = config.time
    pending = [s for s in outputs if s > t]
    while t < T:
        if fixed is not None:
            t_next = next(s for s in fixed if s > t)
        else:
            t_next = t + stepper(config, t, T, ft, dx)
            if pending and pending[0] < t_next:
                t_next = pending[0]
        config = evolve(config, t_next, ft)
        avg, layout, config = resample(config, edges, ft)
        t = t_next
        if pending and abs(pending[0] - t) <= 1e-14 * max(1.0, T):
            results[pending.pop(0)] = avg
            if on_output is not None:
                on_output(t, avg, layout, config)
    return config, results


def dump_fronts_csv(config: FrontConfiguration, path) -> None:
    """Write one CSV row per front for space-time diagrams."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "position", "speed", "kind", "family",
                    "rho_left", "u_left", "p_left", "phase_left",
                    "rho_right", "u_right", "p_right", "phase_right"])
        ph = config.segment_states()[3]
        for k, f in enumerate(config.fronts):
            ls, rs = f.left_state.state, f.right_state.state
            w.writerow([repr(config.time), repr(f.position), repr(f.speed), f.kind, f.family,
                        repr(ls.rho), repr(ls.u), repr(ls.p), int(ph[k]) + 1,
                        repr(rs.rho), repr(rs.u), repr(rs.p), int(ph[k + 1]) + 1])
