"""Flat-file outputs: diagnostics CSV, summary JSON and checkpoints."""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import CSV_HEADER, DiagnosticsRecord
from .profile import DisplacementProfile, Z1Grid

OUTPUT_ENV = "HYPERSQG_OUTPUT_DIR"
CHECKPOINT_FORMAT = "hypersqg-checkpoint"
CHECKPOINT_VERSION = 1


class CheckpointError(ValueError):
    pass


def resolve_output_dir(configured: str | os.PathLike) -> Path:
    """The environment override wins over the configured directory."""
    return Path(os.environ.get(OUTPUT_ENV) or configured)


def write_csv(records, path: str | os.PathLike) -> Path:
    # repr round-trips every float, so equal records give equal bytes
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [CSV_HEADER]
    lines += [",".join(repr(float(v)) for v in r.as_row()) for r in records]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_csv(path: str | os.PathLike) -> list[DiagnosticsRecord]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or ",".join(header) != CSV_HEADER:
            raise ValueError(f"{path}: header must be {CSV_HEADER!r}, got {header!r}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            rows.append(DiagnosticsRecord(*(float(v) for v in row)))
    return rows


def write_json(obj, path: str | os.PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
    return path


@dataclass
class Checkpoint:
    config_text: str
    config_hash: str
    step: int
    disp: DisplacementProfile
    dt_next: float | None
    records: list[DiagnosticsRecord]
    tool_version: str = __version__


def _hex(x: float) -> str:
    return float(x).hex()


def save_checkpoint(ck: Checkpoint, path: str | os.PathLike) -> Path:
    """Write a checkpoint; floats are stored as hex strings so resume is bitwise."""
    g = ck.disp.grid
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "tool_version": ck.tool_version,
        "config_hash": ck.config_hash,
        "config": ck.config_text,
        "step": ck.step,
        "t": _hex(ck.disp.t),
        "dt_next": None if ck.dt_next is None else _hex(ck.dt_next),
        "grid": {"z1_min": _hex(g.z1_min), "z1_max": _hex(g.z1_max), "count": g.count},
        "values": [_hex(v) for v in ck.disp.values],
        "records": [[_hex(v) for v in r.as_row()] for r in ck.records],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(payload) + "\n", encoding="utf-8")
    os.replace(tmp, path)
    return path


def load_checkpoint(path: str | os.PathLike) -> Checkpoint:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"{path}: cannot read checkpoint: {exc}") from None
    if data.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path}: not a {CHECKPOINT_FORMAT} file")
    if data.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {data.get('version')!r}")
    try:
        g = data["grid"]
        grid = Z1Grid(float.fromhex(g["z1_min"]), float.fromhex(g["z1_max"]), int(g["count"]))
        values = np.array([float.fromhex(v) for v in data["values"]])
        disp = DisplacementProfile(grid, values, float.fromhex(data["t"]))
        records = [DiagnosticsRecord(*(float.fromhex(v) for v in row)) for row in data["records"]]
        dt_next = None if data["dt_next"] is None else float.fromhex(data["dt_next"])
        return Checkpoint(data["config"], data["config_hash"], int(data["step"]), disp, dt_next, records,
                          data.get("tool_version", "unknown"))
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"{path}: malformed checkpoint: {exc}") from None
