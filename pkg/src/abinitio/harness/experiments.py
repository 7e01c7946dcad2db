"""Single runs, convergence sweeps and run comparison."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..dem import DemState, run_dem
from ..ensemble import EnsembleConfig, run_ensemble
from ..stats import cauchy_rate
from .cases import ExperimentConfig, resolve
from .io import SchemaError, field_columns, read_table, write_metadata, write_table

__all__ = [
    "RunOutput",
    "ConvergenceReport",
    "run_case",
    "run_convergence",
    "run_bivariate",
    "compare_runs",
    "weighted_fields",
    "domain_means",
    "loglog_fit",
    "AXES",
]

AXES = ("samples", "subvolumes", "mesh")
#: Fields whose Cauchy rates are reported, as ``E[X q]`` with q in (1, rho, u, p).
RATE_FIELDS = ("alpha", "Xrho", "Xu", "Xp")


@dataclass
class RunOutput:
    """Result of :func:`run_case`.

    Attributes
    ----------
    fields : dict of float to dict
        Per output time: ``alpha`` (M, 2), Favre ``means`` and ``variances``
        keyed like ``Xrho``, and raw ``weighted`` fields ``E[X q]``.
    series : dict of str to ndarray
        Domain-averaged per-phase quantities over time.
    """

    config: ExperimentConfig
    prefix: str
    edges: np.ndarray
    fields: dict
    series: dict
    files: list = field(default_factory=list)
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)


def _prefix(cfg: ExperimentConfig) -> str:
    return "abinitio" if cfg.solver == "abinitio" else f"dem_r{cfg.r:g}"


def weighted_fields(alpha, means) -> dict:
    """``E[X q]`` fields from the fraction and Favre means."""
    out = {"alpha": alpha}
    for key in ("Xrho", "Xu", "Xp", "Xmom", "Xener"):
        out[key] = alpha * means[key]
    return out


def domain_means(edges, weighted: dict) -> dict:
    """Per-phase domain averages ``sum E[X q] dx / sum E[X] dx``."""
    dx = np.diff(edges)[:, None]
    a = (weighted["alpha"] * dx).sum(axis=0)
    out = {"alpha": a / dx.sum()}
    for key in ("Xrho", "Xu", "Xp"):
        out[key] = np.where(a > 0, (weighted[key] * dx).sum(axis=0) / np.where(a > 0, a, 1.0), 0.0)
    return out


def _series_table(times, rows) -> dict:
    cols = {"t": np.asarray(times, float)}
    for stem, key in (("alpha", "alpha"), ("rho", "Xrho"), ("u", "Xu"), ("p", "Xp")):
        for k in (0, 1):
            cols[f"{stem}{k + 1}"] = np.array([r[key][k] for r in rows])
    return cols


def _dem_fields(state: DemState) -> dict:
    alpha, rho, u, p = state.primitives()
    W = state.W
    live = alpha > 0
    means = {"Xrho": rho, "Xu": u, "Xp": p,
             "Xmom": np.where(live, W[:, :, 2] / np.where(live, alpha, 1.0), 0.0),
             "Xener": np.where(live, W[:, :, 3] / np.where(live, alpha, 1.0), 0.0)}
    return {"alpha": alpha.copy(), "means": means, "variances": None,
            "weighted": weighted_fields(alpha, means)}


def _run_abinitio(cfg: ExperimentConfig, workers, snapshots=()):
    ens = cfg.ensemble_config()
    ens = EnsembleConfig(**{**ens.__dict__, "output_times": (0.0,) + ens.output_times,
                            "snapshots": tuple(snapshots)})
    res = run_ensemble(ens, workers=workers)
    fields_ = {}
    for t, st in res.stats.items():
        fields_[t] = {"alpha": st.alpha, "means": st.mean, "variances": {"alpha": st.alpha_var, **st.var},
                      "weighted": {"alpha": st.alpha, **st.raw}, "density": res.interface_density[t]}
    extra = {"collisions_total": int(res.collisions.sum()),
             "collisions_max": int(res.collisions.max()),
             "initial_blocks": res.n_blocks}
    return res.edges, fields_, res, extra


def _run_dem(cfg: ExperimentConfig):
    state = cfg.dem_state()
    dcfg = cfg.dem_config()
    fields_ = {0.0: _dem_fields(state)}
    times, rows = [0.0], [domain_means(state.edges, fields_[0.0]["weighted"])]

    def record(s):
        times.append(s.time)
        rows.append(domain_means(s.edges, weighted_fields(*_alpha_means(s))))

    steps = 0
    for t in cfg.output_times:
        before = len(times)
        state = run_dem(state, t, dcfg, on_step=record)
        steps += len(times) - before
        fields_[t] = _dem_fields(state)
    return state.edges, fields_, times, rows, {"dem_steps": steps}


def _alpha_means(state):
    f = _dem_fields(state)
    return f["alpha"], f["means"]


def run_case(cfg: ExperimentConfig, workers: int | None = None, write: bool = True) -> RunOutput:
    """Run one experiment and write its CSVs and metadata to ``cfg.out``.

    Files are ``<prefix>_t<j>.csv`` per output time (``j = 0`` is the
    initial data), ``<prefix>_series.csv`` and ``<prefix>_meta.json``,
    where the prefix is ``abinitio`` or ``dem_r<r>``.
    """
    cfg = resolve(cfg)
    t0 = time.perf_counter()
    prefix = _prefix(cfg)
    if cfg.solver == "abinitio":
        edges, fields_, _, extra = _run_abinitio(cfg, workers)
        times = sorted(fields_)
        rows = [domain_means(edges, fields_[t]["weighted"]) for t in times]
    else:
        edges, fields_, times, rows, extra = _run_dem(cfg)
    out = RunOutput(cfg, prefix, edges, fields_, _series_table(times, rows),
                    wall_time=time.perf_counter() - t0, extra=extra)
    if write:
        _write(out)
    return out


def _write(out: RunOutput) -> None:
    cfg = out.config
    d = Path(cfg.out)
    d.mkdir(parents=True, exist_ok=True)
    xc = 0.5 * (out.edges[1:] + out.edges[:-1])
    files = []
    for j, t in enumerate(sorted(out.fields)):
        f = out.fields[t]
        cols = field_columns(xc, f["alpha"], f["means"], f["variances"], f.get("density"))
        files.append(write_table(d / f"{out.prefix}_t{j:04d}.csv", cols, "fields",
                                 {"solver": cfg.solver, "time": repr(float(t))}))
    files.append(write_table(d / f"{out.prefix}_series.csv", out.series, "series", {"solver": cfg.solver}))
    out.files = [p.name for p in files]
    write_metadata(d / f"{out.prefix}_meta.json", cfg.to_dict(),
                   {"times": sorted(out.fields), "files": out.files, "wall_time": out.wall_time,
                    "seed": cfg.seed, **out.extra})


# ---------------------------------------------------------------------------
# convergence
# ---------------------------------------------------------------------------


def loglog_fit(x, y):
    """Least-squares fit ``log y = log C + q log x``; returns ``(q, C)``."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if len(x) < 2 or np.any(y <= 0):
        return float("nan"), float("nan")
    q, c = np.polyfit(np.log(x), np.log(y), 1)
    return float(q), float(np.exp(c))


def _restrict(a, factor: int):
    """Average a fine (M, ...) field onto a mesh ``factor`` times coarser."""
    if factor == 1:
        return a
    return a.reshape((a.shape[0] // factor, factor) + a.shape[1:]).mean(axis=1)


@dataclass
class ConvergenceReport:
    """Cauchy rates between consecutive sweep values.

    ``rates[kind][name]`` lists the rates for ``kind`` in ``{"mean",
    "var"}`` and ``name`` like ``alpha1`` or ``Xrho2``; ``total`` sums
    them over names. ``slopes`` and ``constants`` hold the log-log fits
    of the rates against the coarser sweep value.
    """

    axis: str
    values: list
    rates: dict
    total: dict
    slopes: dict
    constants: dict

    def to_columns(self) -> dict:
        cols = {"value": np.asarray(self.values[:-1], float)}
        for kind in ("mean", "var"):
            if not self.rates[kind]:
                continue
            for name, r in self.rates[kind].items():
                cols[f"{kind}_{name}"] = np.asarray(r)
            cols[f"{kind}_total"] = np.asarray(self.total[kind])
        return cols


def _final(run_fields: dict):
    t = max(run_fields)
    return run_fields[t]


def _rates(levels, dx_of):
    """Cauchy rates of the weighted means and variances between consecutive levels."""
    rates = {"mean": {}, "var": {}}
    for j in range(len(levels) - 1):
        a, b = levels[j], levels[j + 1]
        ma, mb = a["weighted"], b["weighted"]
        va = a["variances"] or {}
        vb = b["variances"] or {}
        fa = len(a["alpha"])
        fb = len(b["alpha"])
        coarse = min(fa, fb)
        dx = dx_of(coarse)
        for key in RATE_FIELDS:
            for k in (0, 1):
                name = f"{key}{k + 1}"
                xa = _restrict(ma[key][:, k], fa // coarse)
                xb = _restrict(mb[key][:, k], fb // coarse)
                rates["mean"].setdefault(name, []).append(cauchy_rate(xa, xb, dx))
                if key in va and key in vb:
                    ya = _restrict(va[key][:, k], fa // coarse)
                    yb = _restrict(vb[key][:, k], fb // coarse)
                    rates["var"].setdefault(name, []).append(cauchy_rate(ya, yb, dx))
    return rates


def run_convergence(cfg: ExperimentConfig, axis: str, points, workers: int | None = None,
                    write: bool = True) -> ConvergenceReport:
    """Sweep one parameter and report Cauchy rates of the final-time fields.

    ``samples`` reuses the prefixes of a single run with ``max(points)``
    samples; ``subvolumes`` reruns with each ``N``; ``mesh`` reruns with
    each mesh size (``dem_M`` for the DEM, ``M`` otherwise) and averages
    the finer field onto the coarser mesh before comparing.
    """
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    points = [int(p) for p in points]
    if len(points) < 3:
        raise ValueError("a sweep needs at least three points")
    cfg = resolve(cfg)
    levels = []
    if axis == "samples":
        if cfg.solver != "abinitio":
            raise ValueError("the samples axis needs the ab-initio solver")
        c = replace(cfg, L=max(points))
        _, _, res, _ = _run_abinitio(c, workers, snapshots=points)
        T = max(res.stats)
        for n in points:
            st = res.snapshots[n][T]
            levels.append({"alpha": st.alpha, "weighted": {"alpha": st.alpha, **st.raw},
                           "variances": {"alpha": st.alpha_var, **st.var}})
        M = cfg.M
    else:
        for v in points:
            if axis == "subvolumes":
                c = replace(cfg, N=v)
            elif cfg.solver == "dem":
                c = replace(cfg, dem_M=v)
            else:
                c = replace(cfg, M=v)
            levels.append(_final(run_case(c, workers=workers, write=False).fields))
        for a, b in zip(levels[:-1], levels[1:]):
            n1, n2 = sorted((len(a["alpha"]), len(b["alpha"])))
            if n2 % n1:
                raise ValueError("mesh sizes must be integer multiples of each other")
    length = 2.0
    rates = _rates(levels, lambda m: length / m)
    total = {kind: list(np.sum([r for r in rates[kind].values()], axis=0)) if rates[kind] else []
             for kind in rates}
    slopes, consts = {}, {}
    xs = points[:-1]
    for kind in ("mean", "var"):
        for name, r in list(rates[kind].items()) + [("total", total[kind])]:
            if len(r) >= 2:
                slopes[f"{kind}_{name}"], consts[f"{kind}_{name}"] = loglog_fit(xs, r)
    report = ConvergenceReport(axis, points, rates, total, slopes, consts)
    if write:
        d = Path(cfg.out)
        d.mkdir(parents=True, exist_ok=True)
        write_table(d / f"convergence_{axis}.csv", report.to_columns(), "convergence",
                    {"axis": axis, "solver": cfg.solver})
        with open(d / f"convergence_{axis}.json", "w") as fh:
            json.dump({"axis": axis, "values": points, "slopes": slopes, "constants": consts,
                       "config": cfg.to_dict()}, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report


#: ExperimentConfig field varied by each axis of an outer sweep.
_AXIS_FIELD = {"samples": "L", "subvolumes": "N", "mesh": "M"}


def run_bivariate(cfg: ExperimentConfig, outer: str, outer_points, axis: str, points,
                  workers: int | None = None, write: bool = True) -> dict:
    """Repeat a convergence sweep along ``axis`` for every value of a second axis.

    Returns a mapping from each outer value to its :class:`ConvergenceReport`.
    Written tables go to ``<out>/<outer>_<value>/``.
    """
    if outer not in AXES or outer == axis:
        raise ValueError("outer must be a different axis from the swept one")
    cfg = resolve(cfg)
    name = _AXIS_FIELD[outer]
    if outer == "mesh" and cfg.solver == "dem":
        name = "dem_M"
    out = {}
    for v in outer_points:
        c = replace(cfg, **{name: int(v)}, out=str(Path(cfg.out) / f"{outer}_{int(v)}"))
        out[int(v)] = run_convergence(c, axis, points, workers=workers, write=write)
    return out


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------


def compare_runs(file_a, file_b) -> dict:
    """L1 distances ``sum dx |a - b|`` of every shared value column of two field tables.

    Raises
    ------
    SchemaError
        If the tables are not field tables, or differ in mesh or time.
    """
    ta, a = read_table(file_a)
    tb, b = read_table(file_b)
    for t in (ta, tb):
        if t.get("kind") != "fields":
            raise SchemaError("only field tables can be compared")
    if ta.get("time") is not None and tb.get("time") is not None:
        if float(ta["time"]) != float(tb["time"]):
            raise SchemaError(f"output times differ: {ta['time']} vs {tb['time']}")
    xa, xb = a.get("x"), b.get("x")
    if xa is None or xb is None or xa.shape != xb.shape or np.any(xa != xb):
        raise SchemaError("meshes differ")
    if len(xa) > 1:
        mids = 0.5 * (xa[1:] + xa[:-1])
        edges = np.concatenate(([2 * xa[0] - mids[0]], mids, [2 * xa[-1] - mids[-1]]))
        dx = np.diff(edges)
    else:
        dx = np.ones(1)
    return {name: cauchy_rate(a[name], b[name], dx) for name in a if name != "x" and name in b}
