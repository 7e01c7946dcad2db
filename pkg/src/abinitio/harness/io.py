"""CSV and metadata output.

Every CSV starts with one ``#`` line naming the schema version and the
table kind, followed by a header row. Floats are written with ``repr`` so
that a fixed run always produces the same bytes.
"""
from __future__ import annotations

import csv
import json
import platform
from pathlib import Path

import numpy as np

from .cases import FORMAT_VERSION

__all__ = [
    "SchemaError",
    "write_table",
    "read_table",
    "field_columns",
    "write_metadata",
    "VARIABLES",
]

#: (column stem, accumulated field) pairs of the per-cell tables.
VARIABLES = (("rho", "Xrho"), ("u", "Xu"), ("p", "Xp"), ("mom", "Xmom"), ("E", "Xener"))


class SchemaError(ValueError):
    """A CSV does not have the expected schema, mesh or times."""


def _fmt(v) -> str:
    return repr(float(v))


def write_table(path, columns: dict, kind: str, meta: dict | None = None) -> Path:
    """Write equal-length columns as CSV with a schema comment line."""
    path = Path(path)
    names = list(columns)
    arrays = [np.asarray(columns[n], float) for n in names]
    n = {a.shape[0] for a in arrays}
    if len(n) != 1:
        raise ValueError("columns must have equal length")
    tags = [f"schema={FORMAT_VERSION}", f"kind={kind}"]
    tags += [f"{k}={v}" for k, v in (meta or {}).items()]
    with open(path, "w", newline="") as fh:
        fh.write("# " + " ".join(tags) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*arrays):
            w.writerow([_fmt(v) for v in row])
    return path


def read_table(path):
    """Read a table written by :func:`write_table`.

    Returns
    -------
    (dict, dict)
        Tags of the schema line and a mapping from column name to array.
    """
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise SchemaError(f"{path}: missing schema line")
        tags = dict(t.split("=", 1) for t in first[1:].split())
        if int(tags.get("schema", -1)) != FORMAT_VERSION:
            raise SchemaError(f"{path}: unsupported schema {tags.get('schema')}")
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: no header")
    names = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, len(names))
    return tags, {n: data[:, j] for j, n in enumerate(names)}


def field_columns(x, alpha, means: dict, variances: dict | None, density=None) -> dict:
    """Columns of a per-cell table.

    ``means`` and ``variances`` map accumulated field names (``Xrho`` ...)
    to arrays of shape (M, 2).
    """
    cols = {"x": x, "alpha1": alpha[:, 0], "alpha2": alpha[:, 1]}
    for stem, key in VARIABLES:
        for k in (0, 1):
            cols[f"{stem}{k + 1}"] = means[key][:, k]
    zero = np.zeros_like(alpha)
    var = variances or {}
    for stem, key in (("alpha", "alpha"),) + VARIABLES:
        for k in (0, 1):
            cols[f"var_{stem}{k + 1}"] = var.get(key, zero)[:, k]
    for stem, key in (("alpha", "alpha"),) + VARIABLES:
        for k in (0, 1):
            cols[f"sd_{stem}{k + 1}"] = np.sqrt(np.maximum(var.get(key, zero)[:, k], 0.0))
    cols["lambda"] = np.zeros(len(x)) if density is None else density
    return cols


def _versions() -> dict:
    import numba
    import scipy

    from .. import __version__

    return {"abinitio": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__}


def write_metadata(path, config: dict, extra: dict) -> Path:
    """JSON sidecar with the resolved configuration and run information."""
    doc = {"schema": FORMAT_VERSION, "config": config, "versions": _versions()}
    doc.update(extra)
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")
