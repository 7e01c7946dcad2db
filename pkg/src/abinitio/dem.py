"""First-order discrete equation method with r-weighted probability coefficients.

Each cell carries both phases through the variables ``alpha_k (1, rho, rho u,
rho E)_k``. At every cell face, the four phase pairs (left phase, right
phase) each solve a Riemann problem. Same-phase pairs give conservative
fluxes. Cross-phase pairs give a conservative flux on the side the contact
leaves from, and a Lagrangian flux ``(-sigma, 0, p*, p* sigma)`` that moves
volume and does pressure work inside the cell the contact enters. The
pair weights are the probabilities of finding each phase on each side of
the face; the parameter ``r`` blends the two limiting ways of arranging
them.

Relaxation is either a finite-rate source driven by an interface density
``lambda`` or an instantaneous projection onto a common velocity and
pressure after each step.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .eos import EosParams
from .riemann import FullState, godunov_flux_arrays, raise_for_status, solve

__all__ = [
    "DemConfig",
    "DemState",
    "PositivityError",
    "NoEquilibriumError",
    "probability_coeffs",
    "flux_indicator",
    "dem_step",
    "relax_to_equilibrium",
    "stable_dt",
    "run_dem",
    "ALPHA_FREEZE",
]

#: Phase-conditional states are frozen where the fraction is at most this.
ALPHA_FREEZE = 1e-8
ALPHA_SLACK = 1e-12
RELAX_MODES = ("instantaneous", "finite-rate")


class PositivityError(ArithmeticError):
    """A fraction left [0, 1] or a phase state became invalid."""


class NoEquilibriumError(ArithmeticError):
    """The pressure-equilibrium equation has no admissible root in a cell."""


@dataclass(frozen=True)
class DemConfig:
    """Scheme parameters.

    Parameters
    ----------
    r : float
        Probability blending parameter in [0, 1].
    lam : float or ndarray
        Interface density per cell (finite-rate relaxation only).
    cfl : float
    relaxation : {"instantaneous", "finite-rate"}
    """

    r: float = 0.0
    lam: float | np.ndarray = 0.0
    cfl: float = 0.9
    relaxation: str = "instantaneous"

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ValueError("r must lie in [0, 1]")
        if np.any(np.asarray(self.lam) < 0):
            raise ValueError("lam must be non-negative")
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError("cfl must lie in (0, 1]")
        if self.relaxation not in RELAX_MODES:
            raise ValueError(f"relaxation must be one of {RELAX_MODES}")


@dataclass(frozen=True)
class DemState:
    """Cell data of both phases.

    Attributes
    ----------
    W : ndarray, shape (M, 2, 4)
        ``alpha_k * (1, rho, rho u, rho E)`` per cell and phase.
    edges : ndarray, shape (M + 1,)
    phases : (EosParams, EosParams)
    time : float
    """

    W: np.ndarray
    edges: np.ndarray
    phases: tuple
    time: float = 0.0

    @classmethod
    def from_primitive(cls, edges, alpha1, rho, u, p, phases, time: float = 0.0) -> "DemState":
        """Build from the phase-1 fraction and per-phase primitives of shape (M, 2)."""
        edges = np.asarray(edges, float)
        M = len(edges) - 1
        a1 = np.broadcast_to(np.asarray(alpha1, float), (M,))
        alpha = np.stack([a1, 1.0 - a1], axis=1)
        rho, u, p = (np.broadcast_to(np.asarray(v, float), (M, 2)) for v in (rho, u, p))
        W = np.empty((M, 2, 4))
        for k in range(2):
            E = _energy(rho[:, k], u[:, k], p[:, k], phases[k])
            W[:, k] = alpha[:, k, None] * np.stack([np.ones(M), rho[:, k], rho[:, k] * u[:, k], E], axis=1)
        return cls(W, edges, tuple(phases), float(time))

    @property
    def alpha(self) -> np.ndarray:
        return self.W[:, :, 0]

    @property
    def dx(self) -> np.ndarray:
        return np.diff(self.edges)

    def primitives(self):
        """Phase-conditional ``(alpha, rho, u, p)``, each of shape (M, 2).

        Where a phase fraction is at most ``ALPHA_FREEZE`` its state is
        replaced by the other phase's primitive state.
        """
        W = self.W
        alpha = W[:, :, 0]
        live = alpha > ALPHA_FREEZE
        safe = np.where(live, alpha, 1.0)
        rho = W[:, :, 1] / safe
        u = W[:, :, 2] / np.where(live, W[:, :, 1], 1.0)
        p = np.empty_like(rho)
        with np.errstate(divide="ignore", invalid="ignore"):
            for k in range(2):
                e = W[:, k, 3] / np.where(live[:, k], W[:, k, 1], 1.0) - 0.5 * u[:, k] ** 2
                p[:, k] = _pressure(rho[:, k], e, self.phases[k])
        for k in range(2):
            dead = ~live[:, k]
            o = 1 - k
            rho[dead, k], u[dead, k], p[dead, k] = rho[dead, o], u[dead, o], p[dead, o]
        return alpha, rho, u, p

    def totals(self) -> np.ndarray:
        """Domain integrals of (alpha, mass, momentum, energy) per phase, shape (2, 4)."""
        return (self.W * self.dx[:, None, None]).sum(axis=0)


def _energy(rho, u, p, k: EosParams):
    g, pi, b = k.as_tuple()
    return rho * (p + g * pi) / (g - 1.0) * (1.0 / rho - b) + 0.5 * rho * u * u


def _pressure(rho, e, k: EosParams):
    g, pi, b = k.as_tuple()
    return (g - 1.0) * e / (1.0 / rho - b) - g * pi


def _sound(rho, p, k: EosParams):
    g, pi, b = k.as_tuple()
    return np.sqrt(g * (p + pi) / ((1.0 - b * rho) * rho))


def probability_coeffs(alpha_left, alpha_right, r):
    """Probabilities of each phase pair at a face.

    Parameters
    ----------
    alpha_left, alpha_right : float or ndarray
        Fraction of phase ``p`` in the left and right cells; phase ``q``
        holds the rest.
    r : float

    Returns
    -------
    (P_pp, P_pq, P_qp, P_qq)
        ``P_xy`` is the probability of phase ``x`` on the left and ``y`` on
        the right.
    """
    aLp = np.asarray(alpha_left, float)
    aRp = np.asarray(alpha_right, float)
    aLq, aRq = 1.0 - aLp, 1.0 - aRp
    pp = r * np.maximum(aLp - aRq, 0.0) + (1 - r) * np.minimum(aLp, aRp)
    pq = r * np.minimum(aLp, aRq) + (1 - r) * np.maximum(aLp - aRp, 0.0)
    qq = r * np.maximum(aLq - aRp, 0.0) + (1 - r) * np.minimum(aLq, aRq)
    qp = r * np.minimum(aLq, aRp) + (1 - r) * np.maximum(aLq - aRq, 0.0)
    return pp, pq, qp, qq


def flux_indicator(left: FullState, right: FullState) -> int:
    """Sign of the contact speed; zero counts as positive."""
    return 1 if solve(left, right).u_star >= 0.0 else -1


def _pair(rho, u, p, phases, kl, kr):
    """Riemann problems at all faces with phase ``kl`` left and ``kr`` right."""
    gl, pil, bl = phases[kl].as_tuple()
    gr, pir, br = phases[kr].as_tuple()
    n = rho.shape[0] - 1
    ones = np.ones(n)
    flux, us, ps, status = godunov_flux_arrays(
        rho[:-1, kl], u[:-1, kl], p[:-1, kl], gl * ones, pil * ones, bl * ones,
        rho[1:, kr], u[1:, kr], p[1:, kr], gr * ones, pir * ones, br * ones)
    bad = np.flatnonzero(status)
    if bad.size:
        raise_for_status(int(status[bad[0]]), f"face {int(bad[0])}, phases ({kl + 1}, {kr + 1})")
    ftil = np.concatenate([np.zeros((n, 1)), flux], axis=1)
    flag = np.stack([-us, np.zeros(n), ps, ps * us], axis=1)
    beta = np.where(us >= 0.0, 1.0, -1.0)
    return ftil, flag, beta


def _lagrangian_pairs(rho, u, p, phases):
    """Lagrangian fluxes of the (1, 2) and (2, 1) contacts inside each cell."""
    out = []
    for kl, kr in ((0, 1), (1, 0)):
        gl, pil, bl = phases[kl].as_tuple()
        gr, pir, br = phases[kr].as_tuple()
        n = rho.shape[0]
        ones = np.ones(n)
        _, us, ps, status = godunov_flux_arrays(
            rho[:, kl], u[:, kl], p[:, kl], gl * ones, pil * ones, bl * ones,
            rho[:, kr], u[:, kr], p[:, kr], gr * ones, pir * ones, br * ones)
        bad = np.flatnonzero(status)
        if bad.size:
            raise_for_status(int(status[bad[0]]), f"cell {int(bad[0])}")
        out.append(np.stack([-us, np.zeros(n), ps, ps * us], axis=1))
    return out


def _rhs(state: DemState, cfg: DemConfig):
    alpha, rho, u, p = state.primitives()
    # transmissive ghost cells
    ext = [np.concatenate([v[:1], v, v[-1:]]) for v in (alpha, rho, u, p)]
    a, r_, u_, p_ = ext
    ph = state.phases
    F, L, B = {}, {}, {}
    for kl in (0, 1):
        for kr in (0, 1):
            F[kl, kr], L[kl, kr], B[kl, kr] = _pair(r_, u_, p_, ph, kl, kr)
    P = dict(zip(((0, 0), (0, 1), (1, 0), (1, 1)), probability_coeffs(a[:-1, 0], a[1:, 0], cfg.r)))
    pos = lambda x: np.maximum(x, 0.0)  # noqa: E731
    dx = state.dx
    out = np.zeros_like(state.W)
    for k in (0, 1):
        l = 1 - k
        kk, kl, lk = (k, k), (k, l), (l, k)
        E = (P[kk][:, None] * F[kk]
             + (pos(B[kl]) * P[kl])[:, None] * F[kl]
             + (pos(-B[lk]) * P[lk])[:, None] * F[lk])
        wl_lk = (pos(B[lk]) * P[lk])[:, None] * L[lk]
        wl_kl = (pos(B[kl]) * P[kl])[:, None] * L[kl]
        wr_lk = (pos(-B[lk]) * P[lk])[:, None] * L[lk]
        wr_kl = (pos(-B[kl]) * P[kl])[:, None] * L[kl]
        bdry = wl_lk[:-1] - wl_kl[:-1] + wr_lk[1:] - wr_kl[1:]
        out[:, k] = (-(E[1:] - E[:-1]) + bdry) / dx[:, None]
    if cfg.relaxation == "finite-rate" and np.any(np.asarray(cfg.lam) > 0):
        lag12, lag21 = _lagrangian_pairs(rho, u, p, ph)
        lam = np.broadcast_to(np.asarray(cfg.lam, float), (len(dx),))
        mixed = np.all(alpha > ALPHA_FREEZE, axis=1)
        src = np.where(mixed[:, None], lam[:, None] * (lag21 - lag12), 0.0)
        out[:, 0] += src
        out[:, 1] -= src
    return out


def _check(state: DemState) -> None:
    a = state.alpha
    if np.any(a < -ALPHA_SLACK) or np.any(a > 1.0 + ALPHA_SLACK) or not np.all(np.isfinite(state.W)):
        i = int(np.flatnonzero(np.any((a < -ALPHA_SLACK) | (a > 1 + ALPHA_SLACK)
                                      | ~np.isfinite(state.W).all(axis=2), axis=1))[0])
        raise PositivityError(f"volume fraction out of range in cell {i}: {a[i]}")
    _, rho, _, p = state.primitives()
    live = a > ALPHA_FREEZE
    for k, par in enumerate(state.phases):
        g, pi, b = par.as_tuple()
        bad = live[:, k] & ((rho[:, k] <= 0) | (1.0 - b * rho[:, k] <= 0) | (p[:, k] + pi <= 0)
                            | ~np.isfinite(p[:, k]))
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise PositivityError(f"invalid phase-{k + 1} state in cell {i}: rho={rho[i, k]}, p={p[i, k]}")


def dem_step(state: DemState, dt: float, cfg: DemConfig) -> DemState:
    """One forward-Euler step, followed by the relaxation projection in instantaneous mode.

    Raises
    ------
    PositivityError
        If a fraction leaves [0, 1] or a phase state becomes invalid.
    """
    W = state.W + dt * _rhs(state, cfg)
    new = replace(state, W=W, time=state.time + dt)
    _check(new)
    if cfg.relaxation == "instantaneous":
        new = relax_to_equilibrium(new)
    return new


def _phase_pressure(alpha, m, eint, alpha0, par: EosParams):
    """Pressure of a phase compressed from ``alpha0`` to ``alpha`` at equilibrium pressure."""
    g, pi, b = par.as_tuple()
    v = (alpha - b * m) / (g - 1.0)
    return (eint - g * pi * v) / (v + alpha - alpha0)


def relax_to_equilibrium(state: DemState, tol: float = 1e-14, max_iter: int = 200) -> DemState:
    """Project every two-phase cell onto a common velocity and pressure.

    Per cell, phase masses and the totals of momentum and energy are
    conserved. Velocity relaxes to the mass-weighted mean; each phase keeps
    the kinetic energy it loses as internal energy. The fractions then move
    until both pressures agree, each phase exchanging ``p d(alpha)`` work at
    the common pressure. The scalar root in ``alpha_1`` is bracketed and
    found by bisection.

    Raises
    ------
    NoEquilibriumError
        If the pressure difference does not change sign over the admissible
        fraction interval.
    """
    alpha, rho, u, p = state.primitives()
    mixed = np.all(alpha > ALPHA_FREEZE, axis=1)
    scale = np.maximum(np.abs(p).max(axis=1), 1.0)
    uscale = np.maximum(np.abs(u).max(axis=1), 1.0)
    done = (np.abs(p[:, 0] - p[:, 1]) <= tol * scale) & (np.abs(u[:, 0] - u[:, 1]) <= tol * uscale)
    idx = np.flatnonzero(mixed & ~done)
    if idx.size == 0:
        return state
    W = state.W.copy()
    w = W[idx]
    a0 = w[:, :, 0]
    m = w[:, :, 1]
    mom = w[:, :, 2]
    uk = mom / m
    ubar = mom.sum(axis=1) / m.sum(axis=1)
    # internal energy per phase after velocity relaxation
    eint = w[:, :, 3] - 0.5 * mom * uk + 0.5 * m * (uk - ubar[:, None]) ** 2
    k1, k2 = state.phases

    def f(a1):
        return (_phase_pressure(a1, m[:, 0], eint[:, 0], a0[:, 0], k1)
                - _phase_pressure(1.0 - a1, m[:, 1], eint[:, 1], a0[:, 1], k2))

    def pole(par, j):
        g, _, b = par.as_tuple()
        return ((g - 1.0) * a0[:, j] + b * m[:, j]) / g

    lo = pole(k1, 0)
    hi = 1.0 - pole(k2, 1)
    span = hi - lo
    lo = lo + 1e-15 * np.maximum(span, 1e-300)
    hi = hi - 1e-15 * np.maximum(span, 1e-300)
    flo, fhi = f(lo), f(hi)
    ok = (span > 0) & (flo > 0) & (fhi < 0)
    if not np.all(ok):
        i = int(idx[np.flatnonzero(~ok)[0]])
        raise NoEquilibriumError(f"no pressure equilibrium in cell {i}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        right = fm > 0
        lo = np.where(right, mid, lo)
        hi = np.where(right, hi, mid)
        if np.all(hi - lo <= 4e-16 * np.maximum(np.abs(hi), 1.0)):
            break
    a1 = 0.5 * (lo + hi)
    a = np.stack([a1, 1.0 - a1], axis=1)
    pe = _phase_pressure(a1, m[:, 0], eint[:, 0], a0[:, 0], k1)
    e_new = eint - pe[:, None] * (a - a0)
    w_new = np.empty_like(w)
    w_new[:, :, 0] = a
    w_new[:, :, 1] = m
    w_new[:, :, 2] = m * ubar[:, None]
    w_new[:, :, 3] = e_new + 0.5 * m * ubar[:, None] ** 2
    W[idx] = w_new
    return replace(state, W=W)


def stable_dt(state: DemState, cfl: float) -> float:
    """``cfl * dx / max(|u| + a)`` over cells and present phases."""
    alpha, rho, u, p = state.primitives()
    smax = 0.0
    for k, par in enumerate(state.phases):
        live = alpha[:, k] > ALPHA_FREEZE
        if np.any(live):
            smax = max(smax, float(np.max(np.abs(u[live, k]) + _sound(rho[live, k], p[live, k], par))))
    return cfl * float(np.min(state.dx)) / smax


def run_dem(state: DemState, T: float, cfg: DemConfig, max_steps: int | None = None, on_step=None):
    """March to ``T`` (or ``max_steps`` steps) with the CFL time step.

    ``on_step(state)`` is called after every step.
    """
    steps = 0
    while state.time < T and (max_steps is None or steps < max_steps):
        dt = min(stable_dt(state, cfg.cfl), T - state.time)
        state = dem_step(state, dt, cfg)
        if T - state.time <= 1e-14 * T:
            state = replace(state, time=float(T))
        steps += 1
        if on_step is not None:
            on_step(state)
    return state
