"""Exact Riemann solver for the 1D Euler equations with NASG closures.

Left and right states may belong to different materials. The parameter
vector ``k = (gamma, pi, b)`` is a passive scalar carried by the contact, so
the wave structure is the classical one: a 1-wave, a contact, a 3-wave.

The star pressure is the root of the pressure function

    f(p) = f_L(p) + f_R(p) + (u_R - u_L)

found with a safeguarded Newton iteration. With ``P = p + pi`` and the
reduced specific volume ``w = 1/rho - b`` the wave functions are

    shock:        f_K = (p - p_K) sqrt(A_K / (P + B_K)),
                  A_K = 2 w_K / (gamma + 1),  B_K = (gamma - 1)/(gamma + 1) P_K
    rarefaction:  f_K = 2 c_K / (gamma - 1) ((P / P_K)^((gamma-1)/(2 gamma)) - 1)

where ``c = sqrt(gamma P w)`` equals ``a (1 - b rho)``. Along an isentrope
``P w^gamma`` is constant, and ``u -+ 2 c / (gamma - 1)`` is a Riemann
invariant, so rarefaction fans have closed-form states when parametrized by
the velocity.

The scalar kernels below are compiled with numba and shared by the front
tracking and DEM modules; :func:`solve`, :func:`sample`,
:func:`godunov_flux` and :func:`lagrangian_flux` wrap them for Python use.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .eos import (
    ConservedState,
    EosDomainError,
    EosParams,
    PhaseState,
    VACUUM_TOL,
    to_conserved,
)

__all__ = [
    "RiemannError",
    "VacuumError",
    "ConvergenceError",
    "FullState",
    "RiemannSolution",
    "GodunovFlux",
    "solve",
    "sample",
    "godunov_flux",
    "lagrangian_flux",
    "godunov_flux_arrays",
    "RTOL",
    "MAX_ITER",
]

RTOL = 1e-13
MAX_ITER = 100

OK = 0
VACUUM = 1
NO_CONVERGENCE = 2
BAD_STATE = 3


class RiemannError(RuntimeError):
    """Base class for Riemann solver failures."""


class VacuumError(RiemannError):
    """The data generate vacuum: the pressure function has no admissible root."""


class ConvergenceError(RiemannError):
    """The star-pressure iteration exceeded its budget."""


def raise_for_status(status: int, where: str = "") -> None:
    if status == OK:
        return
    suffix = f" ({where})" if where else ""
    if status == VACUUM:
        raise VacuumError("Riemann data generate vacuum" + suffix)
    if status == NO_CONVERGENCE:
        raise ConvergenceError("star pressure iteration did not converge" + suffix)
    raise EosDomainError("invalid Riemann input state" + suffix)


# ---------------------------------------------------------------------------
# compiled scalar kernels
# ---------------------------------------------------------------------------


@njit(cache=True)
def valid_state(rho, p, g, pi, b):
    return rho >= VACUUM_TOL and 1.0 - b * rho > 0.0 and p + pi >= VACUUM_TOL


@njit(cache=True)
def sound(rho, p, g, pi, b):
    return math.sqrt(g * (p + pi) / ((1.0 - b * rho) * rho))


@njit(cache=True)
def energy_density(rho, u, p, g, pi, b):
    """Total energy per unit volume ``rho E``."""
    return (p + g * pi) * (1.0 - b * rho) / (g - 1.0) + 0.5 * rho * u * u


@njit(cache=True)
def wave_fn(p, rho, pk, g, pi, b):
    """Wave function f_K(p) and its derivative."""
    P = p + pi
    PK = pk + pi
    w = 1.0 / rho - b
    if p > pk:
        A = 2.0 * w / (g + 1.0)
        B = (g - 1.0) / (g + 1.0) * PK
        q = math.sqrt(A / (P + B))
        return (p - pk) * q, q * (1.0 - 0.5 * (p - pk) / (P + B))
    c = math.sqrt(g * PK * w)
    r = P / PK
    if r <= 0.0:
        return -2.0 * c / (g - 1.0), math.inf
    f = 2.0 * c / (g - 1.0) * (r ** ((g - 1.0) / (2.0 * g)) - 1.0)
    df = c / (g * PK) * r ** (-(g + 1.0) / (2.0 * g))
    return f, df


@njit(cache=True)
def star_state(rl, ul, pl, gl, pil, bl, rr, ur, pr, gr, pir, br):
    """Star pressure and velocity.

    Returns
    -------
    (p_star, u_star, status, iterations)
    """
    if not (valid_state(rl, pl, gl, pil, bl) and valid_state(rr, pr, gr, pir, br)):
        return math.nan, math.nan, BAD_STATE, 0
    du = ur - ul
    # uniform pressure and velocity is an exact contact solution
    if pl == pr and du == 0.0:
        return pl, ul, OK, 0
    plo = max(-pil, -pir)
    flo = wave_fn(plo, rl, pl, gl, pil, bl)[0] + wave_fn(plo, rr, pr, gr, pir, br)[0] + du
    if flo >= 0.0:
        return math.nan, math.nan, VACUUM, 0
    # upper bracket
    phi = max(pl, pr)
    fhi = wave_fn(phi, rl, pl, gl, pil, bl)[0] + wave_fn(phi, rr, pr, gr, pir, br)[0] + du
    k = 0
    while fhi < 0.0:
        phi = plo + 2.0 * (phi - plo)
        fhi = wave_fn(phi, rl, pl, gl, pil, bl)[0] + wave_fn(phi, rr, pr, gr, pir, br)[0] + du
        k += 1
        if k > 2000:
            return math.nan, math.nan, NO_CONVERGENCE, k
    lo = plo
    hi = phi
    # pressure-velocity linearization as the initial guess, clipped to the bracket
    al = sound(rl, pl, gl, pil, bl)
    ar = sound(rr, pr, gr, pir, br)
    p = 0.5 * (pl + pr) - 0.125 * du * (rl + rr) * (al + ar)
    if not (lo < p < hi):
        p = 0.5 * (lo + hi)
    for it in range(1, MAX_ITER + 1):
        fa, da = wave_fn(p, rl, pl, gl, pil, bl)
        fb, db = wave_fn(p, rr, pr, gr, pir, br)
        f = fa + fb + du
        if f == 0.0:
            return p, 0.5 * (ul + ur) + 0.5 * (fb - fa), OK, it
        if f < 0.0:
            lo = p
        else:
            hi = p
        d = da + db
        pn = p - f / d if d > 0.0 and d < math.inf else 0.5 * (lo + hi)
        scale = max(abs(pn), abs(pl), abs(pr), 1e-300)
        newton_ok = lo <= pn <= hi
        if not newton_ok:
            pn = 0.5 * (lo + hi)
        if (newton_ok and abs(pn - p) <= RTOL * scale) or hi - lo <= 4e-16 * scale:
            fa = wave_fn(pn, rl, pl, gl, pil, bl)[0]
            fb = wave_fn(pn, rr, pr, gr, pir, br)[0]
            return pn, 0.5 * (ul + ur) + 0.5 * (fb - fa), OK, it
        p = pn
    return math.nan, math.nan, NO_CONVERGENCE, MAX_ITER


@njit(cache=True)
def star_density(ps, rho, pk, g, pi, b):
    """Density behind the K-wave connecting ``(rho, pk)`` to pressure ``ps``."""
    if ps == pk:
        return rho
    P = ps + pi
    PK = pk + pi
    w = 1.0 / rho - b
    if ps > pk:
        ws = w * ((g - 1.0) * P + (g + 1.0) * PK) / ((g + 1.0) * P + (g - 1.0) * PK)
    else:
        ws = w * (PK / P) ** (1.0 / g)
    return 1.0 / (ws + b)


@njit(cache=True)
def shock_mass_flux(ps, rho, pk, g, pi, b):
    """Mass flux through a shock from ``(rho, pk)`` to ``ps``; speed is this over rho."""
    PK = pk + pi
    A = 2.0 * (1.0 / rho - b) / (g + 1.0)
    B = (g - 1.0) / (g + 1.0) * PK
    return math.sqrt((ps + pi + B) / A)


@njit(cache=True)
def _fan_state(xi, rho, uk, pk, g, pi, b, ps, sgn):
    """State inside a rarefaction at ``xi``; ``sgn`` is -1 for the 1-fan, +1 for the 3-fan."""
    PK = pk + pi
    w = 1.0 / rho - b
    c = math.sqrt(g * PK * w)
    J = uk - sgn * 2.0 * c / (g - 1.0)
    if b == 0.0:
        cx = sgn * (xi - J) * (g - 1.0) / (g + 1.0)
        P = PK * (cx / c) ** (2.0 * g / (g - 1.0))
    else:
        # characteristic speed is monotone in P along the isentrope
        lo = ps + pi
        hi = PK
        for _ in range(200):
            P = 0.5 * (lo + hi)
            cx = c * (P / PK) ** ((g - 1.0) / (2.0 * g))
            wx = w * (PK / P) ** (1.0 / g)
            lam = J + sgn * 2.0 * cx / (g - 1.0) + sgn * cx * (wx + b) / wx
            # 1-fan: lam decreases with P; 3-fan: lam increases with P
            if (sgn < 0.0 and lam > xi) or (sgn > 0.0 and lam < xi):
                lo = P
            else:
                hi = P
            if hi - lo <= 1e-16 * hi:
                break
        P = 0.5 * (lo + hi)
        cx = c * (P / PK) ** ((g - 1.0) / (2.0 * g))
    wx = w * (PK / P) ** (1.0 / g)
    return 1.0 / (wx + b), J + sgn * 2.0 * cx / (g - 1.0), P - pi


@njit(cache=True)
def sample_state(xi, rl, ul, pl, gl, pil, bl, rr, ur, pr, gr, pir, br, ps, us):
    """Self-similar solution at ``xi``.

    Returns
    -------
    (rho, u, p, side)
        ``side`` is 0 on the left of the contact and 1 on the right.
    """
    if xi <= us:
        if ps > pl:
            s = ul - shock_mass_flux(ps, rl, pl, gl, pil, bl) / rl
            if xi < s:
                return rl, ul, pl, 0
            return star_density(ps, rl, pl, gl, pil, bl), us, ps, 0
        if ps < pl:
            if xi < ul - sound(rl, pl, gl, pil, bl):
                return rl, ul, pl, 0
            rs = star_density(ps, rl, pl, gl, pil, bl)
            if xi >= us - sound(rs, ps, gl, pil, bl):
                return rs, us, ps, 0
            r, u, p = _fan_state(xi, rl, ul, pl, gl, pil, bl, ps, -1.0)
            return r, u, p, 0
        return rl, us, ps, 0
    if ps > pr:
        s = ur + shock_mass_flux(ps, rr, pr, gr, pir, br) / rr
        if xi > s:
            return rr, ur, pr, 1
        return star_density(ps, rr, pr, gr, pir, br), us, ps, 1
    if ps < pr:
        if xi > ur + sound(rr, pr, gr, pir, br):
            return rr, ur, pr, 1
        rs = star_density(ps, rr, pr, gr, pir, br)
        if xi <= us + sound(rs, ps, gr, pir, br):
            return rs, us, ps, 1
        r, u, p = _fan_state(xi, rr, ur, pr, gr, pir, br, ps, 1.0)
        return r, u, p, 1
    return rr, us, ps, 1


@njit(cache=True)
def godunov_flux_arrays(rl, ul, pl, gl, pil, bl, rr, ur, pr, gr, pir, br):
    """Godunov fluxes and star values for arrays of Riemann problems.

    All inputs are 1D arrays of equal length. Returns the flux ``(n, 3)``,
    the star velocity, the star pressure and a status array.
    """
    n = rl.shape[0]
    flux = np.empty((n, 3))
    us_out = np.empty(n)
    ps_out = np.empty(n)
    status = np.zeros(n, dtype=np.int64)
    for i in range(n):
        ps, us, st, _ = star_state(rl[i], ul[i], pl[i], gl[i], pil[i], bl[i],
                                   rr[i], ur[i], pr[i], gr[i], pir[i], br[i])
        status[i] = st
        if st != OK:
            flux[i, 0] = flux[i, 1] = flux[i, 2] = math.nan
            us_out[i] = ps_out[i] = math.nan
            continue
        r0, u0, p0, side = sample_state(0.0, rl[i], ul[i], pl[i], gl[i], pil[i], bl[i],
                                        rr[i], ur[i], pr[i], gr[i], pir[i], br[i], ps, us)
        if side == 0:
            E0 = energy_density(r0, u0, p0, gl[i], pil[i], bl[i])
        else:
            E0 = energy_density(r0, u0, p0, gr[i], pir[i], br[i])
        # F = u U + p D with D = (0, 1, u)
        flux[i, 0] = u0 * r0
        flux[i, 1] = u0 * (r0 * u0) + p0
        flux[i, 2] = u0 * E0 + p0 * u0
        us_out[i] = us
        ps_out[i] = ps
    return flux, us_out, ps_out, status


# ---------------------------------------------------------------------------
# Python API
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FullState:
    """A phase state paired with the parameters of its material."""

    state: PhaseState
    params: EosParams

    @classmethod
    def of(cls, rho: float, u: float, p: float, params: EosParams) -> "FullState":
        return cls(PhaseState(float(rho), float(u), float(p)), params)

    def args(self) -> tuple:
        s, k = self.state, self.params
        return (s.rho, s.u, s.p, k.gamma, k.pi, k.b)

    def conserved(self) -> ConservedState:
        return to_conserved(self.state, self.params)

    def conserved_array(self) -> np.ndarray:
        c = self.conserved()
        return np.array([c.rho, c.mom, c.ener])


@dataclass(frozen=True)
class RiemannSolution:
    """Complete wave structure of a Riemann problem.

    Attributes
    ----------
    p_star, u_star : float
        Star pressure and velocity (the contact speed).
    rho_star_left, rho_star_right : float
        Densities on either side of the contact.
    left_kind, right_kind : str
        ``"shock"``, ``"rarefaction"`` or ``"none"`` for the 1- and 3-waves.
    left_speeds, right_speeds : tuple of float
        Shock speed as a 1-tuple, or ``(head, tail)`` of a rarefaction, or
        empty for a degenerate wave.
    iterations : int
        Newton iterations used for the star pressure.
    """

    left: FullState
    right: FullState
    p_star: float
    u_star: float
    rho_star_left: float
    rho_star_right: float
    left_kind: str
    right_kind: str
    left_speeds: tuple
    right_speeds: tuple
    iterations: int = 0

    @property
    def contact_speed(self) -> float:
        return self.u_star

    def wave_speed_range(self) -> tuple[float, float]:
        """Slowest and fastest signal speeds."""
        lo = min(self.left_speeds) if self.left_speeds else self.u_star
        hi = max(self.right_speeds) if self.right_speeds else self.u_star
        return lo, hi


def solve(left: FullState, right: FullState) -> RiemannSolution:
    """Solve the Riemann problem between ``left`` and ``right``.

    Raises
    ------
    VacuumError
        If the data generate vacuum.
    ConvergenceError
        If the star-pressure iteration fails.
    """
    left.state.check(left.params)
    right.state.check(right.params)
    al = left.args()
    ar = right.args()
    ps, us, status, iters = star_state(*al, *ar)
    raise_for_status(status)
    rl, ul, pl, gl, pil, bl = al
    rr, ur, pr, gr, pir, br = ar
    rsl = star_density(ps, rl, pl, gl, pil, bl)
    rsr = star_density(ps, rr, pr, gr, pir, br)
    if ps > pl:
        lk, ls = "shock", (ul - shock_mass_flux(ps, rl, pl, gl, pil, bl) / rl,)
    elif ps < pl:
        lk, ls = "rarefaction", (ul - sound(rl, pl, gl, pil, bl), us - sound(rsl, ps, gl, pil, bl))
    else:
        lk, ls = "none", ()
    if ps > pr:
        rk, rs = "shock", (ur + shock_mass_flux(ps, rr, pr, gr, pir, br) / rr,)
    elif ps < pr:
        rk, rs = "rarefaction", (ur + sound(rr, pr, gr, pir, br), us + sound(rsr, ps, gr, pir, br))
    else:
        rk, rs = "none", ()
    return RiemannSolution(left, right, float(ps), float(us), float(rsl), float(rsr),
                           lk, rk, tuple(map(float, ls)), tuple(map(float, rs)), int(iters))


def sample(sol: RiemannSolution, xi: float) -> FullState:
    """Exact self-similar state at ``xi = x / t``."""
    r, u, p, side = sample_state(float(xi), *sol.left.args(), *sol.right.args(),
                                 sol.p_star, sol.u_star)
    return FullState.of(r, u, p, sol.left.params if side == 0 else sol.right.params)


@dataclass(frozen=True)
class GodunovFlux:
    """Flux at ``xi = 0`` together with its decomposition ``F = u U + p D``."""

    flux: np.ndarray
    u: float
    p: float
    state: ConservedState


def godunov_flux(left: FullState, right: FullState) -> GodunovFlux:
    """Godunov flux of the exact solution sampled at ``xi = 0``."""
    s0 = sample(solve(left, right), 0.0)
    c = s0.conserved()
    u, p = s0.state.u, s0.state.p
    flux = np.array([u * c.rho, u * c.mom + p, u * c.ener + p * u])
    return GodunovFlux(flux, u, p, c)


def lagrangian_flux(left: FullState, right: FullState) -> np.ndarray:
    """Flux through the material contact in its own frame.

    ``F(U*) - sigma U*`` at the contact reduces to ``(0, p*, p* u*)``; the
    volume-fraction component ``-sigma`` is prepended.
    """
    sol = solve(left, right)
    us, ps = sol.u_star, sol.p_star
    return np.array([-us, 0.0, ps, ps * us])
