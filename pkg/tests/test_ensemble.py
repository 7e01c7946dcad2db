import pickle

import numpy as np
import pytest

from abinitio.ensemble import (
    EnsembleConfig,
    SampleFailure,
    coalesce_cells,
    default_workers,
    estimate_interface_density,
    run_ensemble,
    run_sample,
)
from abinitio.eos import EosParams
from abinitio.front_tracking import FtConfig, PhaseLayout, init_fronts, track
from abinitio.microscale import MacroCellSpec, SampleStreams, generate_uniform
from abinitio.riemann import FullState

IG = EosParams(1.4)
G16 = EosParams(1.6)


def two_state_cells(M, alpha, s_left, s_right):
    e = np.linspace(-1, 1, M + 1)
    out = []
    for i in range(M):
        left = e[i] + e[i + 1] < 0
        a = alpha[0] if left else alpha[1]
        out.append(MacroCellSpec(e[i], e[i + 1], a, s_left if left else s_right))
    return out


def mech_cells(M):
    return two_state_cells(M, (0.9, 0.1),
                           (FullState.of(1.0, 0.9, 0.3, IG), FullState.of(1.0, 0.9, 0.3, G16)),
                           (FullState.of(0.125, 0.9, 0.3, IG), FullState.of(0.125, 0.9, 0.3, G16)))


def sod_cells(M, alpha=(1.0, 1.0)):
    return two_state_cells(M, alpha,
                           (FullState.of(1.0, 0.0, 1.0, IG), FullState.of(1.0, 0.0, 1.0, G16)),
                           (FullState.of(0.125, 0.0, 0.1, IG), FullState.of(0.125, 0.0, 0.1, G16)))


def test_single_sample_pure_phase_matches_front_tracking():
    cells = sod_cells(20)
    ft = FtConfig(delta=0.05, resample_steps=10)
    res = run_ensemble(EnsembleConfig(cells, 1, 0.2, ft, n_sub=8), workers=1)
    st = res.stats[0.2]
    edges = res.edges
    cfg = init_fronts(edges, [c.states[0] for c in cells], ft, phases=(IG, G16))
    _, out = track(cfg, edges, 0.2, ft, output_times=(0.2,))
    ref = out[0.2]
    assert np.allclose(st.mean["Xrho"][:, 0], ref.Xrho[:, 0], rtol=1e-12, atol=0)
    assert np.allclose(st.mean["Xp"][:, 0], ref.Xp[:, 0], rtol=1e-12, atol=0)
    assert np.allclose(st.alpha[:, 0], 1.0, rtol=0, atol=1e-14)
    assert np.all(st.mean["Xrho"][:, 1] == 0.0)
    for v in st.var.values():
        assert np.all(v == 0.0)


def test_mechanical_equilibrium_favre_means():
    cfg = EnsembleConfig(mech_cells(40), 4, 0.1, FtConfig(delta=0.01), n_sub=32)
    st = run_ensemble(cfg, workers=1).stats[0.1]
    present = st.alpha > 1e-12
    assert np.all(np.abs(st.mean["Xu"][present] - 0.9) <= 1e-10)
    assert np.all(np.abs(st.mean["Xp"][present] - 0.3) <= 1e-10)


def test_worker_count_does_not_change_results():
    cfg = EnsembleConfig(sod_cells(16, (0.9, 0.1)), 6, 0.1, FtConfig(delta=0.1), n_sub=8,
                         output_times=(0.05,), snapshots=(3,))
    a = run_ensemble(cfg, workers=1)
    b = run_ensemble(cfg, workers=4)
    for t in cfg.output_times:
        for name in a.stats[t].mean:
            assert np.array_equal(a.stats[t].mean[name], b.stats[t].mean[name])
            assert np.array_equal(a.stats[t].var[name], b.stats[t].var[name])
        assert np.array_equal(a.interface_density[t], b.interface_density[t])
    assert np.array_equal(a.snapshots[3][0.1].alpha, b.snapshots[3][0.1].alpha)
    assert np.array_equal(a.collisions, b.collisions)


def test_snapshot_equals_shorter_run():
    base = dict(cells=mech_cells(10), T=0.05, ft=FtConfig(delta=0.05), n_sub=16)
    long = run_ensemble(EnsembleConfig(n_samples=5, snapshots=(2,), **base), workers=1)
    short = run_ensemble(EnsembleConfig(n_samples=2, **base), workers=1)
    assert np.array_equal(long.snapshots[2][0.05].raw["Xrho"], short.stats[0.05].raw["Xrho"])


def test_interface_density_examples():
    edges = np.linspace(0, 1, 5)
    pure = [PhaseLayout(np.array([0.0, 1.0]), np.array([0]))] * 3
    assert np.all(estimate_interface_density(pure, edges) == 0.0)
    one = PhaseLayout(np.array([0.0, 0.1, 0.3, 0.6, 0.8, 1.0]), np.array([0, 1, 0, 1, 0]))
    assert np.allclose(estimate_interface_density([one, one], edges), 1 / 0.25)
    with pytest.raises(ValueError):
        estimate_interface_density([], edges)


def test_interface_density_grows_with_subvolumes():
    cells = [MacroCellSpec(i / 4, (i + 1) / 4, 0.5,
                           (FullState.of(1, 0, 1, IG), FullState.of(1, 0, 1, G16))) for i in range(4)]
    edges = np.linspace(0, 1, 5)
    means = []
    for n in (8, 16, 32):
        lays = [generate_uniform(cells, n, SampleStreams(0, s)).layout for s in range(400)]
        means.append(estimate_interface_density(lays, edges).mean())
    assert means[0] < means[1] < means[2]


def test_sample_failure_reports_seed():
    cfg = EnsembleConfig(sod_cells(8, (0.9, 0.1)), 2, 0.2, FtConfig(delta=0.05, max_collisions=0),
                         n_sub=8, seed=17)
    with pytest.raises(SampleFailure) as err:
        run_ensemble(cfg, workers=1)
    assert err.value.seed == 17 and err.value.sample == 0
    again = pickle.loads(pickle.dumps(err.value))
    assert again.seed == 17 and "seed 17" in str(again)


def test_run_sample_shapes():
    cfg = EnsembleConfig(mech_cells(10), 1, 0.05, FtConfig(delta=0.05), n_sub=8, output_times=(0.0,))
    fields, inter, ncoll = run_sample(cfg, 0)
    assert fields.shape == (2, 6, 10, 2) and inter.shape == (2, 10)
    assert ncoll >= 0


def test_config_validation_and_blocks():
    with pytest.raises(ValueError):
        EnsembleConfig(mech_cells(4), 0, 0.1)
    with pytest.raises(ValueError):
        EnsembleConfig(mech_cells(4), 1, 0.1, sampler="other")
    cfg = EnsembleConfig(mech_cells(4), 1, 0.1, output_times=(0.5, 0.05))
    assert cfg.output_times == (0.05, 0.1)
    assert coalesce_cells(mech_cells(6)) == [(0, 3), (3, 6)]


def test_default_workers(monkeypatch):
    monkeypatch.setenv("ABINITIO_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.delenv("ABINITIO_WORKERS")
    assert default_workers() == 1
