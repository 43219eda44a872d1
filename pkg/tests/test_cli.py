from __future__ import annotations

import json

import pytest

from hypersqg.cli import main
from hypersqg.config import parse_config
from hypersqg.outputs import OUTPUT_ENV, load_checkpoint, read_csv
from hypersqg.runner import run_compare, run_simulate, run_validate

SMALL = "alpha: 0.5\ngrid:\n  count: 129\nt_end: 0.6\ncheckpoint_interval: 3\n"


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "out"))
    return tmp_path / "out"


def test_zero_field_completes_with_zero_records(outdir):
    s = run_simulate(parse_config("bump:\n  A: 0\nt_end: 1.0\n"))
    assert s.status == "completed" and s.T_pred is None
    recs = read_csv(outdir / "diagnostics.csv")
    assert recs[-1].t == 1.0
    assert all(r.Z == 0 and r.bkm == 0 and r.sup_grad == 0 and r.sup_omega_big == 0 for r in recs)


def test_small_run_outputs(outdir):
    s = run_simulate(parse_config(SMALL))
    assert s.status == "completed"
    recs = read_csv(outdir / "diagnostics.csv")
    assert all(b.Z <= a.Z for a, b in zip(recs, recs[1:]))
    assert all(b.bkm >= a.bkm for a, b in zip(recs, recs[1:]))
    summary = json.loads((outdir / "summary.json").read_text())
    assert summary["config_hash"] == parse_config(SMALL).config_hash
    assert summary["tool_version"] and summary["eps_tail"] == 1e-14
    assert summary["T_pred"] is None
    for name in ("Z.svg", "W.svg", "bkm.svg"):
        assert (outdir / "plots" / name).exists()
    ck = load_checkpoint(outdir / "checkpoints" / "ckpt_000003.json")
    assert ck.config_hash == summary["config_hash"] and ck.step == 3


def test_identical_config_identical_bytes(tmp_path, monkeypatch):
    blobs = []
    for k in range(2):
        monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / f"r{k}"))
        run_simulate(parse_config(SMALL))
        blobs.append((tmp_path / f"r{k}" / "diagnostics.csv").read_bytes())
    assert blobs[0] == blobs[1]


def test_resume_is_bitwise(tmp_path, monkeypatch):
    cfg = parse_config(SMALL)
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "full"))
    run_simulate(cfg)
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "part"))
    stopped = run_simulate(cfg, max_steps=4)
    assert stopped.status == "error"
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "resumed"))
    run_simulate(cfg, resume=tmp_path / "part" / "checkpoints" / "ckpt_000003.json")
    full = (tmp_path / "full" / "diagnostics.csv").read_bytes()
    assert (tmp_path / "resumed" / "diagnostics.csv").read_bytes() == full


def test_resume_rejects_other_config(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "a"))
    run_simulate(parse_config(SMALL), max_steps=3)
    with pytest.raises(ValueError, match="config"):
        run_simulate(parse_config(SMALL + "seed: 4\n"), resume=tmp_path / "a" / "checkpoints" / "final.json")


def test_compare_against_checkpoint(outdir):
    run_simulate(parse_config(SMALL.replace("t_end: 0.6", "t_end: 0.02")))
    out = run_compare(outdir / "checkpoints" / "final.json", 64, dt_max=2e-3)
    assert out["status"] == "ok" and out["discrepancy"] < 1e-3 and out["product_drift"] < 1e-10


def test_validate_zero_field_skips():
    rep = run_validate(parse_config("bump:\n  A: 0\ngrid:\n  count: 129\n"))
    st = {c["name"]: c["status"] for c in rep["checks"]}
    assert rep["ok"] and rep["counts"]["skipped"] > 0
    assert st["transform roundtrip x<->z (relative)"] == "pass"
    assert st["omega_x vs brute-force midpoint"] == "skipped"


def test_validate_coarse_quadrature_reports_failures():
    rep = run_validate(parse_config("grid:\n  count: 129\nquadrature:\n  order: 2\n  panels_per_unit: 2\n"))
    st = {c["name"]: c for c in rep["checks"]}
    assert not rep["ok"]
    assert st["omega_x vs brute-force midpoint"]["status"] == "fail"
    assert st["omega_tilde vs brute-force midpoint"]["status"] == "fail"


@pytest.mark.slow
def test_validate_default_passes():
    rep = run_validate(parse_config("alpha: 0.5\n"))
    assert rep["ok"], [c for c in rep["checks"] if c["status"] != "pass"]


def test_cli_subcommands(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "cli"))
    cfg = tmp_path / "run.yaml"
    cfg.write_text(SMALL)
    assert main(["simulate", "--config", str(cfg), "--set", "t_end=0.05"]) == 0
    assert "status: completed" in capsys.readouterr().out
    ck = tmp_path / "cli" / "checkpoints" / "final.json"
    assert main(["compare", "--checkpoint", str(ck), "--particles", "32"]) == 0
    assert '"discrepancy"' in capsys.readouterr().out
    assert main(["plot", "--csv", str(tmp_path / "cli" / "diagnostics.csv"), "--outdir", str(tmp_path / "p")]) == 0
    assert (tmp_path / "p" / "W.svg").exists()
    capsys.readouterr()


def test_cli_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("alpha: 1.0\n")
    assert main(["simulate", "--config", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "alpha (line 1)" in err and "(0, 1)" in err
    assert main(["validate", "--config", str(tmp_path / "missing.yaml")]) == 2
