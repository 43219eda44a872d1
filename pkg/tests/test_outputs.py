from __future__ import annotations

import json
import math
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hypersqg.diagnostics import CSV_HEADER, DiagnosticsRecord
from hypersqg.outputs import (
    OUTPUT_ENV, Checkpoint, CheckpointError, load_checkpoint, read_csv, resolve_output_dir, save_checkpoint, write_csv,
)
from hypersqg.plots import Figure, Series, emit_plots, render_svg
from hypersqg.profile import DisplacementProfile, Z1Grid

finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(rows=st.lists(st.tuples(*[finite] * 7), min_size=1, max_size=5))
def test_csv_roundtrip_is_exact(rows, tmp_path_factory):
    recs = [DiagnosticsRecord(*r) for r in rows]
    path = write_csv(recs, tmp_path_factory.mktemp("csv") / "d.csv")
    assert path.read_text().splitlines()[0] == CSV_HEADER
    assert read_csv(path) == recs


def test_csv_rejects_wrong_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("t,Z\n0,0\n")
    with pytest.raises(ValueError, match="header"):
        read_csv(p)


def test_checkpoint_roundtrip_bitwise(tmp_path):
    g = Z1Grid(-3.0, 2.0, 17)
    vals = np.random.default_rng(0).uniform(0, 1, 17) / 3.0
    disp = DisplacementProfile(g, vals, t=0.1 + 0.2)
    recs = [DiagnosticsRecord(0.0, 0.0, 1.0, 0.0, 1.0 / 3.0, 0.1, 2.9)]
    ck = Checkpoint("alpha: 0.5\n", "abc", 7, disp, 1.0 / 7.0, recs)
    out = load_checkpoint(save_checkpoint(ck, tmp_path / "c.json"))
    assert out.disp.values.tobytes() == vals.tobytes()
    assert out.disp.t == disp.t and out.dt_next == 1.0 / 7.0
    assert out.records == recs and out.step == 7 and out.config_hash == "abc"
    assert out.disp.grid == g


def test_checkpoint_version_and_format_checked(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"format": "hypersqg-checkpoint", "version": 99}))
    with pytest.raises(CheckpointError, match="version"):
        load_checkpoint(p)
    p.write_text(json.dumps({"format": "other"}))
    with pytest.raises(CheckpointError):
        load_checkpoint(p)
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing.json")


def test_output_dir_override(monkeypatch, tmp_path):
    monkeypatch.delenv(OUTPUT_ENV, raising=False)
    assert resolve_output_dir("x") == Path("x")
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path))
    assert resolve_output_dir("x") == tmp_path


def _parse(path):
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")
    return root


def test_single_record_plots(tmp_path):
    paths = emit_plots([DiagnosticsRecord(0.0, 0.0, 1.0, 0.0, 1.0, 0.1, 3.0)], tmp_path)
    assert sorted(p.name for p in paths) == ["W.svg", "Z.svg", "bkm.svg"]
    for p in paths:
        _parse(p)


def test_empty_records_rejected(tmp_path):
    with pytest.raises(ValueError):
        emit_plots([], tmp_path)


def test_fitted_line_overlays_linear_data(tmp_path):
    ts = np.linspace(0.0, 3.0, 31)
    W = 1.0 - 0.25 * ts
    recs = [DiagnosticsRecord(t, 4.0 * math.log(w), w, t, 1.0, 0.1, 3.0) for t, w in zip(ts, W)]
    fit = {"slope": -0.25, "T_pred": 4.0, "t0": 0.0}
    emit_plots(recs, tmp_path, fit=fit, envelope_slope=-0.25)
    root = _parse(tmp_path / "W.svg")
    ns = {"s": "http://www.w3.org/2000/svg"}
    circles = [(float(c.get("cx")), float(c.get("cy"))) for c in root.iterfind(".//s:circle", ns)]
    lines = root.findall(".//s:polyline", ns)
    assert len(lines) == 3
    (x0, y0), (x1, y1) = [tuple(map(float, p.split(","))) for p in lines[1].get("points").split()]
    # every data marker sits on the fitted line, up to rounding of the coordinates
    for cx, cy in circles:
        assert abs(y0 + (y1 - y0) * (cx - x0) / (x1 - x0) - cy) < 0.02


def test_log_axis_skips_nonpositive():
    svg = render_svg(Figure("b", "t", "y", [Series("s", [0.0, 1.0, 2.0], [0.0, 1.0, 100.0])], log_y=True))
    ET.fromstring(svg)
    assert svg.count("<circle") == 0 and "<polyline" in svg
