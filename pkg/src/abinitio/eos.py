"""Noble-Abel stiffened-gas (NASG) equation of state.

The caloric law is

    e = (p + gamma * pi) / (gamma - 1) * (1 / rho - b)

which reduces to the ideal gas for ``pi = b = 0``, to the stiffened gas for
``b = 0`` and to the co-volume gas for ``pi = 0``. All functions accept
scalars or numpy arrays and validate their inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EosDomainError",
    "EosParams",
    "PhaseState",
    "ConservedState",
    "VACUUM_TOL",
    "internal_energy",
    "pressure_from_energy",
    "sound_speed",
    "to_conserved",
    "to_primitive",
    "physical_flux",
]

#: States with density or shifted pressure below this are rejected.
VACUUM_TOL = 1e-12


class EosDomainError(ValueError):
    """Raised when a thermodynamic state lies outside the valid NASG domain."""


@dataclass(frozen=True)
class EosParams:
    """NASG parameter vector identifying a phase.

    Parameters
    ----------
    gamma : float
        Ratio of specific heats, ``gamma > 1``.
    pi : float
        Stiffness pressure offset, ``pi >= 0``.
    b : float
        Co-volume, ``b >= 0``.

    Notes
    -----
    Equality is exact and component-wise. A run builds exactly two records,
    one per phase, so phase identity never needs a tolerance.
    """

    gamma: float
    pi: float = 0.0
    b: float = 0.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise EosDomainError(f"gamma must exceed 1, got {self.gamma}")
        if not self.pi >= 0.0:
            raise EosDomainError(f"pi must be non-negative, got {self.pi}")
        if not self.b >= 0.0:
            raise EosDomainError(f"b must be non-negative, got {self.b}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.gamma, self.pi, self.b)


@dataclass(frozen=True)
class PhaseState:
    """Primitive state ``(rho, u, p)`` of a single phase."""

    rho: float
    u: float
    p: float

    def check(self, params: EosParams) -> "PhaseState":
        """Return ``self`` after validating it against ``params``."""
        _check_state(self.rho, self.p, params)
        return self


@dataclass(frozen=True)
class ConservedState:
    """Conserved variables ``(rho, rho u, rho E, rho k)`` of a single phase.

    ``rhok`` holds the three passively advected products ``rho * (gamma, pi, b)``.
    """

    rho: float
    mom: float
    ener: float
    rhok: tuple[float, float, float]


def _check_state(rho, p, params: EosParams):
    rho = np.asarray(rho, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(~(rho >= VACUUM_TOL)):
        raise EosDomainError("density below vacuum threshold")
    if np.any(~(1.0 - params.b * rho > 0.0)):
        raise EosDomainError("co-volume bound violated: 1 - b rho <= 0")
    if np.any(~(p + params.pi >= VACUUM_TOL)):
        raise EosDomainError("shifted pressure p + pi below vacuum threshold")


def _ret(x):
    return float(x) if np.ndim(x) == 0 else x


def internal_energy(rho, p, params: EosParams):
    """Specific internal energy.

    Parameters
    ----------
    rho, p : float or ndarray
        Density and pressure.
    params : EosParams

    Returns
    -------
    float or ndarray
        ``(p + gamma pi) / (gamma - 1) * (1/rho - b)``.
    """
    _check_state(rho, p, params)
    g, pi, b = params.as_tuple()
    rho = np.asarray(rho, dtype=float)
    return _ret((p + g * pi) / (g - 1.0) * (1.0 / rho - b))


def pressure_from_energy(rho, e, params: EosParams):
    """Invert :func:`internal_energy` for the pressure.

    Raises
    ------
    EosDomainError
        If ``1 - b rho <= 0`` or the resulting ``p + pi`` is below the
        vacuum threshold.
    """
    g, pi, b = params.as_tuple()
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho >= VACUUM_TOL)) or np.any(~(1.0 - b * rho > 0.0)):
        raise EosDomainError("invalid density for pressure inversion")
    p = (g - 1.0) * np.asarray(e, dtype=float) * rho / (1.0 - b * rho) - g * pi
    if np.any(~(p + pi >= VACUUM_TOL)):
        raise EosDomainError("energy too low: p + pi below vacuum threshold")
    return _ret(p)


def sound_speed(rho, p, params: EosParams):
    """Speed of sound ``sqrt(gamma (p + pi) / ((1 - b rho) rho))``."""
    _check_state(rho, p, params)
    g, pi, b = params.as_tuple()
    rho = np.asarray(rho, dtype=float)
    return _ret(np.sqrt(g * (p + pi) / ((1.0 - b * rho) * rho)))


def to_conserved(state: PhaseState, params: EosParams) -> ConservedState:
    """Primitive to conserved variables."""
    e = internal_energy(state.rho, state.p, params)
    rho = state.rho
    return ConservedState(
        rho=rho,
        mom=rho * state.u,
        ener=rho * (e + 0.5 * state.u * state.u),
        rhok=(rho * params.gamma, rho * params.pi, rho * params.b),
    )


def to_primitive(cons: ConservedState, params: EosParams | None = None):
    """Conserved to primitive variables.

    Parameters
    ----------
    cons : ConservedState
    params : EosParams, optional
        Known phase parameters. When omitted they are recovered from
        ``cons.rhok / cons.rho``, which is exact only up to rounding.

    Returns
    -------
    (PhaseState, EosParams)
    """
    if not cons.rho >= VACUUM_TOL:
        raise EosDomainError("density below vacuum threshold")
    if params is None:
        params = EosParams(*(k / cons.rho for k in cons.rhok))
    u = cons.mom / cons.rho
    e = cons.ener / cons.rho - 0.5 * u * u
    p = pressure_from_energy(cons.rho, e, params)
    return PhaseState(cons.rho, u, p), params


def physical_flux(state: PhaseState, params: EosParams) -> np.ndarray:
    """Euler flux ``[rho u, rho u^2 + p, u (rho E + p)]`` of a phase state."""
    c = to_conserved(state, params)
    u = state.u
    return np.array([c.mom, c.mom * u + state.p, u * (c.ener + state.p)])
