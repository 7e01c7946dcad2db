"""Plain-text experiment files.

A file has an ``[experiment]`` section of ``key = value`` lines using the
field names of :class:`ExperimentConfig`. Triples such as ``left1`` are
comma separated.
"""
from __future__ import annotations

import configparser
from dataclasses import fields
from pathlib import Path

from .cases import ExperimentConfig

__all__ = ["load_config", "save_config", "parse_value"]

SECTION = "experiment"


def _field_types():
    return {f.name: f.type for f in fields(ExperimentConfig)}


def parse_value(name: str, text: str):
    """Convert the text of field ``name`` to its Python value."""
    types = _field_types()
    if name not in types:
        raise KeyError(f"unknown setting {name!r}")
    t = str(types[name])
    text = text.strip()
    if text.lower() in ("none", ""):
        return None
    if "bool" in t:
        return text.lower() in ("1", "true", "yes", "on")
    if "tuple" in t:
        return tuple(float(v) for v in text.split(","))
    if "int" in t and "float" not in t:
        return int(text)
    if "float" in t:
        return float(text)
    return text


def _format(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def load_config(path, **overrides) -> ExperimentConfig:
    """Read an experiment file; keyword overrides win over file values."""
    cp = configparser.ConfigParser()
    cp.optionxform = str  # field names are case sensitive (M, N, L)
    with open(path) as fh:
        cp.read_file(fh)
    if SECTION not in cp:
        raise ValueError(f"{path}: missing [{SECTION}] section")
    values = {k: parse_value(k, v) for k, v in cp[SECTION].items()}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def save_config(cfg: ExperimentConfig, path) -> None:
    cp = configparser.ConfigParser()
    cp.optionxform = str  # field names are case sensitive (M, N, L)
    cp[SECTION] = {k: _format(v) for k, v in cfg.to_dict().items()}
    with open(Path(path), "w") as fh:
        cp.write(fh)
