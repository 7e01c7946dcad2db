import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abinitio.eos import (
    ConservedState,
    EosDomainError,
    EosParams,
    PhaseState,
    internal_energy,
    physical_flux,
    pressure_from_energy,
    sound_speed,
    to_conserved,
    to_primitive,
)

IG = EosParams(1.4)
LAX2 = EosParams(1.6, 2.5)


@pytest.mark.parametrize(
    "rho, p, par, expected",
    [
        (1.0, 1.0, IG, 2.5),
        (1.0, 0.1, LAX2, (0.1 + 1.6 * 2.5) / 0.6),
        (2.0, 1.0, EosParams(2.0, 1.0, 0.1), 1.2),
    ],
)
def test_internal_energy_examples(rho, p, par, expected):
    assert internal_energy(rho, p, par) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("rho, e, par, expected", [(1.0, 2.5, IG, 1.0), (1.0, 4.1 / 0.6, LAX2, 0.1)])
def test_pressure_from_energy_examples(rho, e, par, expected):
    assert pressure_from_energy(rho, e, par) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize(
    "rho, p, par, expected",
    [
        (1.0, 1.0, IG, math.sqrt(1.4)),
        (1.0, 0.1, LAX2, math.sqrt(4.16)),
        (0.125, 0.1, EosParams(1.6), math.sqrt(1.28)),
    ],
)
def test_sound_speed_examples(rho, p, par, expected):
    assert sound_speed(rho, p, par) == pytest.approx(expected, rel=1e-15)


def test_domain_errors():
    with pytest.raises(EosDomainError):
        EosParams(1.0)
    with pytest.raises(EosDomainError):
        EosParams(1.4, -1.0)
    with pytest.raises(EosDomainError):
        internal_energy(20.0, 1.0, EosParams(1.4, 0.0, 0.1))
    with pytest.raises(EosDomainError):
        pressure_from_energy(1.0, -1.0, IG)
    with pytest.raises(EosDomainError):
        sound_speed(1.0, -2.0, EosParams(1.4, 1.0))


def test_array_inputs():
    rho = np.array([1.0, 0.5])
    e = internal_energy(rho, np.array([1.0, 2.0]), IG)
    assert e.shape == (2,)
    assert np.allclose(e, [2.5, 10.0])


# strategies for random valid states
gammas = st.floats(1.05, 4.0)
pis = st.floats(0.0, 5.0)
rhos = st.floats(0.01, 10.0)
shifts = st.floats(1e-3, 10.0)
bfracs = st.floats(0.0, 0.9)


@settings(max_examples=300, deadline=None)
@given(gammas, pis, bfracs, rhos, shifts)
def test_energy_pressure_round_trip(g, pi, bf, rho, shift):
    par = EosParams(g, pi, bf / rho)
    p = shift - pi
    e = internal_energy(rho, p, par)
    p2 = pressure_from_energy(rho, e, par)
    assert internal_energy(rho, p2, par) == pytest.approx(e, rel=1e-12)
    assert p2 + pi == pytest.approx(p + pi, rel=1e-11)


def test_round_trip_thousand_states():
    rng = np.random.default_rng(7)
    g = rng.uniform(1.05, 4.0, 1000)
    pi = rng.uniform(0.0, 5.0, 1000)
    rho = rng.uniform(0.01, 10.0, 1000)
    b = rng.uniform(0.0, 0.9, 1000) / rho
    p = rng.uniform(1e-3, 10.0, 1000) - pi
    for i in range(1000):
        par = EosParams(g[i], pi[i], b[i])
        e = internal_energy(rho[i], p[i], par)
        assert internal_energy(rho[i], pressure_from_energy(rho[i], e, par), par) == pytest.approx(e, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(gammas, rhos, st.floats(1e-3, 10.0))
def test_ideal_gas_reduction(g, rho, p):
    par = EosParams(g)
    assert internal_energy(rho, p, par) == pytest.approx(p / ((g - 1) * rho), rel=1e-14)
    assert sound_speed(rho, p, par) == pytest.approx(math.sqrt(g * p / rho), rel=1e-14)


@settings(max_examples=200, deadline=None)
@given(gammas, pis, rhos, shifts)
def test_stiffened_gas_reduction(g, pi, rho, shift):
    par = EosParams(g, pi)
    p = shift - pi
    assert internal_energy(rho, p, par) == pytest.approx((p + g * pi) / ((g - 1) * rho), rel=1e-12, abs=1e-12)
    assert sound_speed(rho, p, par) == pytest.approx(math.sqrt(g * (p + pi) / rho), rel=1e-13)


@settings(max_examples=200, deadline=None)
@given(gammas, bfracs, rhos, st.floats(1e-3, 10.0))
def test_covolume_reduction(g, bf, rho, p):
    b = bf / rho
    par = EosParams(g, 0.0, b)
    assert internal_energy(rho, p, par) == pytest.approx(p * (1 - b * rho) / ((g - 1) * rho), rel=1e-13)
    assert sound_speed(rho, p, par) == pytest.approx(math.sqrt(g * p / (rho * (1 - b * rho))), rel=1e-13)


@settings(max_examples=100, deadline=None)
@given(gammas, pis, bfracs, rhos, shifts, st.floats(1e-3, 5.0))
def test_sound_speed_increases_with_pressure(g, pi, bf, rho, shift, dp):
    par = EosParams(g, pi, bf / rho)
    p = shift - pi
    assert sound_speed(rho, p + dp, par) > sound_speed(rho, p, par) > 0


@settings(max_examples=200, deadline=None)
@given(gammas, pis, bfracs, rhos, st.floats(-3.0, 3.0), shifts)
def test_conserved_primitive_round_trip(g, pi, bf, rho, u, shift):
    par = EosParams(g, pi, bf / rho)
    s = PhaseState(rho, u, shift - pi)
    c = to_conserved(s, par)
    back, par2 = to_primitive(c, par)
    assert par2 == par
    assert back.rho == rho
    assert back.u == pytest.approx(u, rel=1e-14, abs=1e-14)
    assert back.p + pi == pytest.approx(shift, rel=1e-9, abs=1e-9)
    # parameters recovered from the advected products
    _, rec = to_primitive(c)
    assert rec.gamma == pytest.approx(g, rel=1e-15)


def test_conserved_layout_and_flux():
    c = to_conserved(PhaseState(1.0, 2.0, 1.0), IG)
    assert isinstance(c, ConservedState)
    assert (c.rho, c.mom, c.ener) == (1.0, 2.0, 4.5)
    assert c.rhok == (1.4, 0.0, 0.0)
    assert np.allclose(physical_flux(PhaseState(1.0, 2.0, 1.0), IG), [2.0, 5.0, 11.0])
