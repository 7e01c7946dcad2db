import json

import numpy as np
import pytest

from abinitio.eos import EosParams
from abinitio.front_tracking import FtConfig, init_fronts, track
from abinitio.harness import CASES, ExperimentConfig, compare_runs, resolve, run_case, run_convergence
from abinitio.harness.cli import main
from abinitio.harness.config import load_config, parse_value, save_config
from abinitio.harness.experiments import loglog_fit, run_bivariate
from abinitio.harness.io import SchemaError, read_table, write_table
from abinitio.riemann import FullState


def small(case="mech-equilibrium", tmp=None, **kw):
    base = dict(case=case, M=20, N=16, L=2, delta1=0.05, delta2=0.05)
    base.update(kw)
    if tmp is not None:
        base["out"] = str(tmp)
    return ExperimentConfig(**base)


def test_builtin_initial_data():
    mech = CASES["mech-equilibrium"]
    assert (mech.alpha_left, mech.alpha_right, mech.T) == (0.9, 0.1, 0.1)
    assert mech.left1 == mech.left2 == (1.0, 0.9, 0.3)
    assert mech.right1 == mech.right2 == (0.125, 0.9, 0.3)
    relax = CASES["relaxation"]
    assert relax.alpha_left == relax.alpha_right == 0.9
    assert relax.left1 == (1.0, 0.0, 1.0) and relax.left2 == (0.125, 0.0, 0.1)
    lax = CASES["lax2p"]
    assert lax.eos2 == (1.6, 2.5, 0.0)
    assert lax.desk["delta1"] == 0.05 and lax.desk["delta2"] == 0.1


def test_resolve_defaults_and_scale():
    r = resolve(ExperimentConfig())
    assert (r.M, r.N, r.L, r.T) == (100, 128, 64, 0.1)
    p = resolve(ExperimentConfig(full_scale=True))
    assert (p.M, p.N, p.L) == (1000, 16384, 1024)
    assert resolve(ExperimentConfig(L=5)).L == 5
    with pytest.raises(ValueError):
        ExperimentConfig(case="nope")
    with pytest.raises(ValueError):
        ExperimentConfig(M=0)


def test_config_file_round_trip(tmp_path):
    cfg = resolve(ExperimentConfig(case="lax2p", seed=3, r=0.5))
    path = tmp_path / "exp.ini"
    save_config(cfg, path)
    assert load_config(path) == cfg
    assert load_config(path, L=7).L == 7
    assert parse_value("left1", "1, 0.5, 2") == (1.0, 0.5, 2.0)
    assert parse_value("full_scale", "yes") is True
    with pytest.raises(KeyError):
        parse_value("bogus", "1")


def test_run_case_writes_schema_and_metadata(tmp_path):
    out = run_case(small(tmp=tmp_path), workers=1)
    assert out.files[0] == "abinitio_t0000.csv"
    tags, cols = read_table(tmp_path / "abinitio_t0001.csv")
    assert tags["schema"] == "1" and tags["kind"] == "fields" and float(tags["time"]) == 0.1
    for name in ("x", "alpha1", "rho2", "u1", "p2", "var_alpha1", "sd_p1", "lambda"):
        assert name in cols
    assert len(cols["x"]) == 20
    meta = json.loads((tmp_path / "abinitio_meta.json").read_text())
    assert meta["config"]["M"] == 20 and meta["seed"] == 0 and "numpy" in meta["versions"]
    # the phase-1 fraction is a step advected to x = 0.09; cells reached by
    # inflow through the left boundary are skipped
    a1 = cols["alpha1"]
    x = cols["x"]
    assert np.allclose(a1[(x > -0.8) & (x < 0.0)], 0.9, atol=1 / 16)
    assert np.allclose(a1[x > 0.2], 0.1, atol=1 / 16)
    present = cols["alpha1"] > 1e-12
    assert np.allclose(cols["u1"][present], 0.9, rtol=1e-12)


def test_custom_single_sample_single_phase_is_front_tracking(tmp_path):
    cfg = small("custom", tmp_path, L=1, alpha_left=1.0, alpha_right=1.0, T=0.2,
                resample_steps=5)
    run_case(cfg, workers=1)
    _, cols = read_table(tmp_path / "abinitio_t0001.csv")
    r = resolve(cfg)
    edges = r.edges(r.M)
    ig = EosParams(*r.eos1)
    xc = 0.5 * (edges[1:] + edges[:-1])
    states = [FullState.of(*(r.left1 if x < 0 else r.right1), ig) for x in xc]
    ft = FtConfig(delta=(0.05, 0.05), resample_steps=5)
    _, res = track(init_fronts(edges, states, ft, phases=r.phases), edges, 0.2, ft, output_times=(0.2,))
    assert np.allclose(cols["rho1"], res[0.2].Xrho[:, 0], rtol=1e-12)
    assert np.allclose(cols["p1"], res[0.2].Xp[:, 0], rtol=1e-12)
    assert np.all(cols["var_rho1"] == 0.0)


def test_dem_runs_and_compare(tmp_path):
    a = run_case(small("sod2p", tmp_path, solver="dem", dem_M=50, r=0.0), workers=1)
    b = run_case(small("sod2p", tmp_path, solver="dem", dem_M=50, r=1.0), workers=1)
    assert a.prefix == "dem_r0" and b.prefix == "dem_r1"
    fa, fb = tmp_path / "dem_r0_t0001.csv", tmp_path / "dem_r1_t0001.csv"
    same = compare_runs(fa, fa)
    assert all(v == 0.0 for v in same.values())
    diff = compare_runs(fa, fb)
    assert diff["alpha1"] > 0 and diff["u2"] > 0
    _, series = read_table(tmp_path / "dem_r0_series.csv")
    assert series["t"][0] == 0.0 and series["t"][-1] == pytest.approx(0.2)


def test_compare_rejects_mismatch(tmp_path):
    run_case(small("sod2p", tmp_path / "a", solver="dem", dem_M=50), workers=1)
    run_case(small("sod2p", tmp_path / "b", solver="dem", dem_M=40), workers=1)
    with pytest.raises(SchemaError):
        compare_runs(tmp_path / "a" / "dem_r0_t0001.csv", tmp_path / "b" / "dem_r0_t0001.csv")
    with pytest.raises(SchemaError):
        compare_runs(tmp_path / "a" / "dem_r0_t0000.csv", tmp_path / "a" / "dem_r0_t0001.csv")
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    with pytest.raises(SchemaError):
        read_table(bad)


def test_write_table_requires_equal_columns(tmp_path):
    with pytest.raises(ValueError):
        write_table(tmp_path / "t.csv", {"a": [1.0], "b": [1.0, 2.0]}, "test")


def test_repeated_sweep_values_give_zero_rates(tmp_path):
    rep = run_convergence(small(tmp=tmp_path, L=4), "samples", [3, 3, 3], workers=1)
    assert all(v == 0.0 for v in rep.total["mean"])
    assert (tmp_path / "convergence_samples.csv").exists()


def test_mesh_sweep_restricts_to_coarse_mesh(tmp_path):
    rep = run_convergence(small("sod2p", tmp_path, solver="dem"), "mesh", [25, 50, 100], workers=1)
    assert len(rep.rates["mean"]["alpha1"]) == 2
    assert rep.rates["mean"]["Xp2"][1] < rep.rates["mean"]["Xp2"][0]
    with pytest.raises(ValueError):
        run_convergence(small(tmp=tmp_path), "mesh", [10, 20], workers=1)


def test_bivariate_sweep(tmp_path):
    reps = run_bivariate(small(tmp=tmp_path, L=4), "subvolumes", [8, 16], "samples", [2, 3, 4], workers=1)
    assert sorted(reps) == [8, 16]
    assert (tmp_path / "subvolumes_8" / "convergence_samples.csv").exists()


def test_loglog_fit():
    q, c = loglog_fit([1, 2, 4, 8], [3.0, 1.5, 0.75, 0.375])
    assert q == pytest.approx(-1.0) and c == pytest.approx(3.0)


def test_cli(tmp_path, capsys):
    assert main(["run", "mech-equilibrium", "--set", "M=10", "--set", "N=8", "--set", "L=2",
                 "--workers", "1", "--out", str(tmp_path / "r")]) == 0
    f = tmp_path / "r" / "abinitio_t0001.csv"
    assert f.exists()
    capsys.readouterr()
    assert main(["compare", str(f), str(f)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert "alpha1,0.0" in lines
    ini = tmp_path / "c.ini"
    ini.write_text("[experiment]\nM = 10\nN = 8\nL = 3\n")
    assert main(["converge", "mech-equilibrium", "--config", str(ini), "--axis", "samples",
                 "--points", "1", "2", "3", "--out", str(tmp_path / "c")]) == 0
    assert "mean_total" in capsys.readouterr().out
    with pytest.raises(SystemExit):
        main(["run", "mech-equilibrium", "--set", "nonsense"])
