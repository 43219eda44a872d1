"""Run configuration: a single YAML document with a canonical emitted form."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from typing import Any

import yaml

from .biot_savart import check_alpha
from .evolve_z import StepController
from .initial_data import BumpSpec
from .profile import Z1Grid
from .quadrature import QuadratureRule

DEFAULTS: dict[str, Any] = {
    "alpha": 0.5,
    "bump": {"A": 1.0, "c1": 2.0, "r1": 1.0, "M": 1.0, "profile": "plateau"},
    "grid": {"z1_min": -30.0, "z1_max": None, "count": 1024},
    "quadrature": {"order": 8, "panels_per_unit": 8.0, "eps_tail": 1e-14},
    "controller": {
        "dt_init": 1e-3, "safety": 0.9, "atol": 1e-8, "rtol": 1e-6, "dt_min": 1e-10, "dt_max": 0.25,
    },
    "t_end": 20.0,
    "output_dir": "hypersqg-out",
    "checkpoint_interval": 10,
    "seed": 0,
    "diagnostics": {"lattice": 64, "jitter": 0.25},
    "workers": 1,
}

_INT_KEYS = {"grid.count", "quadrature.order", "checkpoint_interval", "seed", "diagnostics.lattice", "workers"}
_STR_KEYS = {"bump.profile", "output_dir"}
_NULLABLE = {"grid.z1_max"}


class ConfigError(ValueError):
    """Invalid configuration; carries the dotted key path and source line when known."""

    def __init__(self, path: str, reason: str, line: int | None = None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{path or '<root>'}{where}: {reason}")
        self.path = path
        self.reason = reason
        self.line = line


@dataclass(frozen=True)
class RunConfig:
    alpha: float
    bump: BumpSpec
    grid: Z1Grid
    quadrature: QuadratureRule
    controller: StepController
    t_end: float
    output_dir: str
    checkpoint_interval: int
    seed: int
    lattice: int
    jitter: float
    workers: int

    def to_dict(self) -> dict:
        c = self.controller
        q = self.quadrature
        return {
            "alpha": self.alpha,
            "bump": self.bump.to_dict(),
            "grid": self.grid.to_dict(),
            "quadrature": {"order": q.order, "panels_per_unit": q.panels_per_unit, "eps_tail": q.eps_tail},
            "controller": {
                "dt_init": c.dt_init, "safety": c.safety, "atol": c.atol, "rtol": c.rtol,
                "dt_min": c.dt_min, "dt_max": c.dt_max,
            },
            "t_end": self.t_end,
            "output_dir": self.output_dir,
            "checkpoint_interval": self.checkpoint_interval,
            "seed": self.seed,
            "diagnostics": {"lattice": self.lattice, "jitter": self.jitter},
            "workers": self.workers,
        }

    def canonical(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True, default_flow_style=False)

    @property
    def config_hash(self) -> str:
        # output_dir and workers do not change results
        d = self.to_dict()
        d.pop("output_dir")
        d.pop("workers")
        blob = yaml.safe_dump(d, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def with_overrides(self, overrides: list[str]) -> "RunConfig":
        return parse_config(self.canonical(), overrides)

    def with_output_dir(self, path: str) -> "RunConfig":
        return replace(self, output_dir=str(path))


def _line_index(node, prefix: str = "", out: dict | None = None) -> dict[str, int]:
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = f"{prefix}.{k.value}" if prefix else str(k.value)
            out[path] = k.start_mark.line + 1
            _line_index(v, path, out)
    return out


def _merge(defaults: dict, given: dict, prefix: str, lines: dict) -> dict:
    out = {}
    for key in given:
        if key not in defaults:
            path = f"{prefix}.{key}" if prefix else key
            raise ConfigError(path, "unknown key", lines.get(path))
    for key, default in defaults.items():
        path = f"{prefix}.{key}" if prefix else key
        if isinstance(default, dict):
            sub = given.get(key, {}) or {}
            if not isinstance(sub, dict):
                raise ConfigError(path, "expected a mapping", lines.get(path))
            out[key] = _merge(default, sub, path, lines)
        else:
            out[key] = _coerce(path, given.get(key, default), default, lines.get(path))
    return out


def _coerce(path: str, value, default, line):
    if value is None:
        if path in _NULLABLE:
            return None
        raise ConfigError(path, "value is required", line)
    if path in _STR_KEYS:
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}", line)
        return value
    if isinstance(value, bool):
        raise ConfigError(path, f"expected a number, got {value!r}", line)
    if path in _INT_KEYS:
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}", line)
        return value
    if isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(path, f"expected a number, got {value!r}", line) from None
    if not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}", line)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(path, f"must be finite, got {value!r}", line)
    return value


def _set_dotted(tree: dict, dotted: str, raw: str) -> None:
    keys = dotted.split(".")
    node = tree
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError(dotted, "cannot override inside a scalar")
    node[keys[-1]] = yaml.safe_load(raw)


def _build(path: str, line, factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except ValueError as exc:
        raise ConfigError(path, str(exc), line) from None


def parse_config(text: str, overrides: list[str] | None = None) -> RunConfig:
    """Parse and validate a YAML run configuration.

    ``overrides`` are ``dotted.key=value`` strings applied after parsing.
    Raises :class:`ConfigError` naming the first offending key.
    """
    try:
        node = yaml.compose(text)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError("", f"YAML syntax error: {exc}", mark.line + 1 if mark else None) from None
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigError("", "top level must be a mapping", 1)
    lines = _line_index(node) if node is not None else {}
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, val = item.split("=", 1)
        _set_dotted(raw, key.strip(), val)
    d = _merge(DEFAULTS, raw, "", lines)

    L = lines.get
    alpha = _build("alpha", L("alpha"), check_alpha, d["alpha"])
    bump = _build("bump", L("bump"), BumpSpec, **d["bump"])
    g = d["grid"]
    top = bump.box.z1_max
    z1_max = top + 1.0 if g["z1_max"] is None else g["z1_max"]
    if z1_max < top + 1.0:
        raise ConfigError("grid.z1_max", f"must be >= support top + 1 = {top + 1.0:.6g}, got {z1_max}",
                          L("grid.z1_max"))
    grid = _build("grid", L("grid"), Z1Grid, g["z1_min"], z1_max, g["count"])
    quad = _build("quadrature", L("quadrature"), QuadratureRule, **d["quadrature"])
    ctrl = _build("controller", L("controller"), StepController, **d["controller"])
    if not d["t_end"] > 0.0:
        raise ConfigError("t_end", f"must be positive, got {d['t_end']}", L("t_end"))
    if d["checkpoint_interval"] < 1:
        raise ConfigError("checkpoint_interval", "must be >= 1", L("checkpoint_interval"))
    if d["diagnostics"]["lattice"] < 2:
        raise ConfigError("diagnostics.lattice", "must be >= 2", L("diagnostics.lattice"))
    if not 0.0 <= d["diagnostics"]["jitter"] < 1.0:
        raise ConfigError("diagnostics.jitter", "must lie in [0, 1)", L("diagnostics.jitter"))
    if d["workers"] < 1:
        raise ConfigError("workers", "must be >= 1", L("workers"))
    return RunConfig(
        alpha=alpha, bump=bump, grid=grid, quadrature=quad, controller=ctrl, t_end=d["t_end"],
        output_dir=d["output_dir"], checkpoint_interval=d["checkpoint_interval"], seed=d["seed"],
        lattice=d["diagnostics"]["lattice"], jitter=d["diagnostics"]["jitter"], workers=d["workers"],
    )


def load_config(path, overrides: list[str] | None = None) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), overrides)
