import numpy as np
import pytest
from scipy.optimize import brentq

from abinitio.dem import (
    DemConfig,
    DemState,
    PositivityError,
    dem_step,
    flux_indicator,
    probability_coeffs,
    relax_to_equilibrium,
    run_dem,
    stable_dt,
)
from abinitio.eos import EosParams
from abinitio.riemann import FullState, godunov_flux

IG = EosParams(1.4)
G16 = EosParams(1.6)
PHASES = (IG, G16)


def test_coefficient_examples():
    pp, pq, qp, qq = probability_coeffs(0.9, 0.9, 0.0)
    assert (pp, pq) == (pytest.approx(0.9, abs=1e-15), 0.0)
    pp, pq, qp, qq = probability_coeffs(0.9, 0.1, 1.0)
    assert pp == pytest.approx(0.0, abs=1e-15) and pq == pytest.approx(0.9, abs=1e-15)


def test_coefficient_grid_consistency():
    a = np.linspace(0, 1, 21)
    aL, aR, r = np.meshgrid(a, a, np.linspace(0, 1, 11), indexing="ij")
    pp, pq, qp, qq = probability_coeffs(aL, aR, r)
    for c in (pp, pq, qp, qq):
        assert np.all(c >= 0.0)
    assert np.abs(pp + pq - aL).max() <= 1e-14
    assert np.abs(pp + qp - aR).max() <= 1e-14
    assert np.abs(qp + qq - (1 - aL)).max() <= 1e-14
    assert np.abs(pq + qq - (1 - aR)).max() <= 1e-14


def test_coefficients_at_equal_fractions():
    a = np.linspace(0, 1, 21)
    pp0, pq0, _, _ = probability_coeffs(a, a, 0.0)
    pp1, pq1, _, _ = probability_coeffs(a, a, 1.0)
    assert np.allclose(pp0, a, atol=1e-15) and np.all(pq0 == 0.0)
    assert np.allclose(pp1, np.maximum(2 * a - 1, 0), atol=1e-15)
    assert np.allclose(pq1, np.minimum(a, 1 - a), atol=1e-15)
    # both limits agree only for pure cells
    same = np.isclose(pp0, pp1, atol=1e-15)
    assert same.tolist() == [bool(x in (0.0, 1.0)) for x in a]


def test_flux_indicator_signs():
    assert flux_indicator(FullState.of(1, 0.9, 0.3, IG), FullState.of(0.125, 0.9, 0.3, G16)) == 1
    assert flux_indicator(FullState.of(0.125, -0.9, 0.3, G16), FullState.of(1, -0.9, 0.3, IG)) == -1
    # oracle contact speed of this pair is 0.9076 > 0
    assert flux_indicator(FullState.of(1, 0, 1, IG), FullState.of(0.125, 0, 0.1, G16)) == 1
    assert flux_indicator(FullState.of(1, 0, 1, IG), FullState.of(1, 0, 1, IG)) == 1


def sod_single_phase(M):
    e = np.linspace(-1, 1, M + 1)
    xc = 0.5 * (e[1:] + e[:-1])
    rho = np.where(xc < 0, 1.0, 0.125)[:, None] * np.ones(2)
    p = np.where(xc < 0, 1.0, 0.1)[:, None] * np.ones(2)
    return DemState.from_primitive(e, 1.0, rho, 0.0, p, PHASES)


@pytest.mark.parametrize("r", [0.0, 0.5, 1.0])
def test_single_phase_reduces_to_godunov(r):
    st = sod_single_phase(20)
    dt = 0.5 * stable_dt(st, 0.9)
    new = dem_step(st, dt, DemConfig(r=r, relaxation="finite-rate"))
    _, rho, u, p = st.primitives()
    U = st.W[:, 0, 1:]
    states = [FullState.of(rho[i, 0], u[i, 0], p[i, 0], IG) for i in range(20)]
    states = [states[0]] + states + [states[-1]]
    F = np.array([godunov_flux(states[i], states[i + 1]).flux for i in range(21)])
    ref = U - dt / st.dx[:, None] * (F[1:] - F[:-1])
    assert np.allclose(new.W[:, 0, 1:], ref, rtol=1e-12, atol=1e-14)
    assert np.all(new.W[:, 0, 0] == 1.0)


def mixed_uniform(M, seed=0):
    e = np.linspace(-1, 1, M + 1)
    a = np.random.default_rng(seed).uniform(0.05, 0.95, M)
    rho = np.random.default_rng(seed + 1).uniform(0.1, 2.0, (M, 2))
    return DemState.from_primitive(e, a, rho, 0.9, 0.3, PHASES)


@pytest.mark.parametrize("r", [0.0, 0.5, 1.0])
def test_uniform_pressure_velocity_preserved(r):
    st = mixed_uniform(30)
    cfg = DemConfig(r=r)
    for _ in range(10):
        st = dem_step(st, stable_dt(st, 0.9), cfg)
    alpha, _, u, p = st.primitives()
    assert np.abs(u - 0.9).max() <= 1e-12
    assert np.abs(p - 0.3).max() <= 1e-12
    assert np.abs(alpha.sum(axis=1) - 1).max() <= 1e-12


def test_r_irrelevant_for_pure_cells():
    e = np.linspace(-1, 1, 5)
    rho = np.array([[1.0, 0.5], [0.3, 0.2], [0.4, 0.9], [1.2, 0.7]])
    st = DemState.from_primitive(e, np.array([1.0, 1.0, 0.0, 0.0]), rho, 0.1, 0.5, PHASES)
    a = dem_step(st, 1e-3, DemConfig(r=0.0, relaxation="finite-rate"))
    b = dem_step(st, 1e-3, DemConfig(r=1.0, relaxation="finite-rate"))
    assert np.allclose(a.W, b.W, rtol=1e-14, atol=1e-16)


def relaxation_cell():
    return DemState.from_primitive(np.array([0.0, 1.0]), 0.9, np.array([[1.0, 0.125]]), 0.0,
                                   np.array([[1.0, 0.1]]), PHASES)


def relax_oracle():
    """Common pressure for ideal gases from a scalar root find in alpha_1."""
    g1, g2 = 1.4, 1.6
    e1, e2 = 0.9 * 1.0 / (g1 - 1), 0.1 * 0.1 / (g2 - 1)

    def pressure(a1):
        return (e1 + e2) / (a1 / (g1 - 1) + (1 - a1) / (g2 - 1))

    a1 = brentq(lambda a: pressure(a) * (a / (g1 - 1) + a - 0.9) - e1, 0.5, 0.99, xtol=1e-15)
    return a1, pressure(a1)


def test_relaxation_cell_equilibrium():
    st = relaxation_cell()
    out = relax_to_equilibrium(st)
    alpha, rho, u, p = out.primitives()
    assert np.abs(u).max() == 0.0
    assert 0.1 < p[0, 0] < 1.0
    assert p[0, 0] == pytest.approx(p[0, 1], rel=1e-13)
    a1, pe = relax_oracle()
    assert alpha[0, 0] == pytest.approx(a1, rel=1e-12)
    assert p[0, 0] == pytest.approx(pe, rel=1e-12)
    assert np.allclose(out.W[:, :, 1], st.W[:, :, 1], rtol=0, atol=0)
    assert np.allclose(out.W[:, :, 2:].sum(axis=1), st.W[:, :, 2:].sum(axis=1), rtol=1e-14)


def test_equilibrated_cell_unchanged():
    st = mixed_uniform(5)
    out = relax_to_equilibrium(st)
    assert np.array_equal(out.W, st.W)


def test_relaxation_conserves_random_cells():
    rng = np.random.default_rng(4)
    M = 200
    st = DemState.from_primitive(np.linspace(0, 1, M + 1), rng.uniform(0.01, 0.99, M),
                                 rng.uniform(0.1, 3.0, (M, 2)), rng.uniform(-1, 1, (M, 2)),
                                 rng.uniform(0.05, 5.0, (M, 2)), (EosParams(1.4, 0.5, 0.1), EosParams(3.0, 2.0)))
    out = relax_to_equilibrium(st)
    before = st.W[:, :, 1:]
    after = out.W[:, :, 1:]
    assert np.array_equal(after[:, :, 0], before[:, :, 0])
    tot_b, tot_a = before.sum(axis=1), after.sum(axis=1)
    assert np.all(np.abs(tot_a - tot_b) <= 1e-12 * np.maximum(np.abs(tot_b), 1.0))
    alpha, _, u, p = out.primitives()
    assert np.allclose(p[:, 0], p[:, 1], rtol=1e-10)
    assert np.allclose(u[:, 0], u[:, 1], rtol=1e-13, atol=1e-15)
    assert np.allclose(alpha.sum(axis=1), 1.0, rtol=0, atol=1e-14)


def test_instantaneous_relaxation_equalizes_in_one_step():
    e = np.linspace(-1, 1, 21)
    st = DemState.from_primitive(e, 0.9, np.array([1.0, 0.125]), 0.0, np.array([1.0, 0.1]), PHASES)
    st = dem_step(st, stable_dt(st, 0.9), DemConfig())
    _, _, u, p = st.primitives()
    assert np.abs(p[:, 0] - p[:, 1]).max() <= 1e-12
    assert np.abs(u[:, 0] - u[:, 1]).max() <= 1e-12


def test_finite_rate_relaxation_moves_pressures_together():
    e = np.linspace(-1, 1, 11)
    st = DemState.from_primitive(e, 0.9, np.array([1.0, 0.125]), 0.0, np.array([1.0, 0.1]), PHASES)
    out = run_dem(st, 2e-3, DemConfig(lam=5.0, relaxation="finite-rate"))
    _, _, _, p = out.primitives()
    assert np.all(np.abs(p[:, 0] - p[:, 1]) < 0.9)
    assert np.all(out.alpha[:, 0] > 0.9)
    assert out.time == 2e-3


def test_positivity_error():
    st = sod_single_phase(10)
    with pytest.raises(PositivityError):
        dem_step(st, 100 * stable_dt(st, 0.9), DemConfig())


def test_config_validation():
    with pytest.raises(ValueError):
        DemConfig(r=1.5)
    with pytest.raises(ValueError):
        DemConfig(relaxation="other")
    with pytest.raises(ValueError):
        DemConfig(lam=-1.0)
