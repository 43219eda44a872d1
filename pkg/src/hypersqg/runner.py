"""Run orchestration behind the ``hypersqg`` subcommands."""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .biot_savart import InitialField, consistency_omega, grad_u, omega_tilde, omega_tilde_grid, omega_x, velocity
from .brute import axis_limit, omega_tilde_brute, omega_x_brute
from .config import RunConfig, parse_config
from .diagnostics import (
    DiagnosticsRecord, EscapedGrid, GradientLattice, InsufficientData, PreconditionError, blowup_fit, bkm_update,
    locate_Z, sup_grad_omega, support_extent,
)
from .evolve_z import MonotonicityError, PicardDivergence, StepUnderflow, picard_solve, step_adaptive, step_rk4
from .geometry import PointX, support_strip, x_to_z_array, z_to_x_array
from .initial_data import AxisDegenerateError, SectionFloor, cross_section, estimate_Z1_C
from .outputs import (
    Checkpoint, load_checkpoint, resolve_output_dir, save_checkpoint, write_csv, write_json,
)
from .plots import emit_plots
from .profile import DisplacementProfile, Z1Grid
from .quadrature import QuadratureError, QuadratureRule
from .x_oracle import ParticleCloud, ProductDrift, compare_with_z, evolve, product_drift

BLOWUP_STATUSES = ("dt_underflow", "escaped-grid")


@dataclass
class RunSummary:
    status: str
    message: str
    T_pred: float | None
    final: DiagnosticsRecord | None
    config_hash: str
    steps: int
    output_dir: str
    fit: dict | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "status": self.status,
            "message": self.message,
            "T_pred": self.T_pred,
            "final": None if self.final is None else asdict(self.final),
            "config_hash": self.config_hash,
            "tool_version": __version__,
            "steps": self.steps,
            "fit": self.fit,
        }
        d.update(self.extra)
        return d


class _Recorder:
    """Builds one diagnostics record per accepted state."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.lattice = GradientLattice(cfg.bump, cfg.grid.z1_min + 1.0, k=cfg.lattice, seed=cfg.seed,
                                       jitter=cfg.jitter)

    def __call__(self, disp: DisplacementProfile, prev: DiagnosticsRecord | None) -> DiagnosticsRecord:
        cfg = self.cfg
        Z = locate_Z(disp)
        sg = sup_grad_omega(disp, self.lattice)
        bkm = 0.0 if prev is None else bkm_update(prev, disp.t, sg)
        big = omega_tilde_grid(disp, cfg.bump, cfg.alpha, cfg.quadrature, cfg.workers)
        return DiagnosticsRecord(
            t=disp.t, Z=Z, W=math.exp(0.5 * cfg.alpha * Z), bkm=bkm, sup_grad=sg,
            sup_omega_big=float(np.max(big)) if big.size else 0.0,
            support_max_x1=support_extent(disp, self.lattice)[0],
        )


def section_floor(cfg: RunConfig) -> SectionFloor | None:
    if cfg.bump.is_zero:
        return None
    try:
        return estimate_Z1_C(cfg.bump, cfg.quadrature)
    except AxisDegenerateError:
        return None


def _checkpoint_path(outdir: Path, step: int) -> Path:
    return outdir / "checkpoints" / f"ckpt_{step:06d}.json"


def run_simulate(cfg: RunConfig, resume: str | Path | None = None, max_steps: int | None = None) -> RunSummary:
    """Adaptive time loop with per-step diagnostics, checkpoints and outputs.

    ``resume`` continues from a checkpoint written by an earlier run of the
    same configuration; the records it produces are bitwise those of an
    uninterrupted run.  ``max_steps`` caps accepted steps in this call
    (status ``error`` with the checkpoint preserved).
    """
    outdir = resolve_output_dir(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.yaml").write_text(cfg.canonical(), encoding="utf-8")
    chash = cfg.config_hash
    recorder = _Recorder(cfg)
    floor = section_floor(cfg)

    if resume is not None:
        ck = load_checkpoint(resume)
        if ck.config_hash != chash:
            raise ValueError(f"checkpoint {resume} was written for config {ck.config_hash}, not {chash}")
        disp, dt, records, step = ck.disp, ck.dt_next, list(ck.records), ck.step
    else:
        disp = DisplacementProfile.zero(cfg.grid)
        records = [recorder(disp, None)]
        dt, step = None, 0

    status, message = "completed", ""
    taken = 0
    t_end = cfg.t_end
    while True:
        if disp.t >= t_end * (1.0 - 1e-14):
            status, message = "completed", f"reached t_end = {t_end}"
            break
        if max_steps is not None and taken >= max_steps:
            status, message = "error", f"stopped after {taken} steps on request; resume from the last checkpoint"
            break
        trial = cfg.controller.dt_init if dt is None else dt
        trial = min(trial, t_end - disp.t)
        try:
            res = step_adaptive(disp, cfg.controller, cfg.bump, cfg.alpha, cfg.quadrature, dt=trial,
                                workers=cfg.workers)
            rec = recorder(res.disp, records[-1])
        except StepUnderflow as exc:
            status, message = "dt_underflow", str(exc)
            break
        except EscapedGrid as exc:
            status, message = "escaped-grid", str(exc)
            break
        except (MonotonicityError, QuadratureError, PreconditionError, FloatingPointError) as exc:
            status, message = "error", f"{type(exc).__name__}: {exc}"
            break
        disp, dt = res.disp, res.dt_next
        records.append(rec)
        step += 1
        taken += 1
        if step % cfg.checkpoint_interval == 0:
            save_checkpoint(Checkpoint(cfg.canonical(), chash, step, disp, dt, records), _checkpoint_path(outdir, step))

    save_checkpoint(Checkpoint(cfg.canonical(), chash, step, disp, dt, records), outdir / "checkpoints" / "final.json")
    write_csv(records, outdir / "diagnostics.csv")

    fit_dict, T_pred, env = None, None, None
    if status in BLOWUP_STATUSES and floor is not None:
        try:
            fit = blowup_fit(records, floor.Z1, cfg.alpha, floor.C, cfg.grid.z1_min)
            fit_dict = asdict(fit)
            fit_dict["slopes"] = list(fit.slopes)
            fit_dict["window"] = list(fit.window)
            T_pred = fit.T_pred
            env = fit.envelope
        except InsufficientData as exc:
            message += f"; no blow-up fit: {exc}"
    emit_plots(records, outdir / "plots", fit=fit_dict, envelope_slope=env)

    t0_rec = None if fit_dict is None else records[fit_dict["window"][0]]
    summary = RunSummary(
        status=status, message=message, T_pred=T_pred, final=records[-1], config_hash=chash, steps=step,
        output_dir=str(outdir), fit=fit_dict,
        extra={
            "backend": kernels.BACKEND,
            "eps_tail": cfg.quadrature.eps_tail,
            "Z1": None if floor is None else floor.Z1,
            "C_floor": None if floor is None else floor.C,
            "bkm_t0": None if t0_rec is None else t0_rec.bkm,
            "support_min_x1": support_extent(disp, recorder.lattice)[1],
            "records": len(records),
        },
    )
    write_json(summary.to_dict(), outdir / "summary.json")
    return summary


# --- validation report -----------------------------------------------------------

@dataclass
class Check:
    name: str
    status: str  # pass | fail | skipped
    measured: float | None
    tolerance: float | None
    detail: str = ""


def _check(name: str, tol: float, fn, skip: str | None = None) -> Check:
    if skip:
        return Check(name, "skipped", None, tol, skip)
    try:
        measured = float(fn())
    except Exception as exc:  # failures are report entries, not crashes
        return Check(name, "fail", None, tol, f"{type(exc).__name__}: {exc}")
    ok = math.isfinite(measured) and measured <= tol
    return Check(name, "pass" if ok else "fail", measured, tol)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def run_validate(cfg: RunConfig) -> dict:
    """Execute the invariant suites at the configured resolution."""
    spec, alpha, rule = cfg.bump, cfg.alpha, cfg.quadrature
    zero = spec.is_zero
    vacuous = "zero initial field: nothing to compare" if zero else None
    rng = np.random.default_rng(cfg.seed)
    field_ = InitialField(spec)
    box = spec.box
    checks: list[Check] = []

    def roundtrip():
        x1 = np.exp(rng.uniform(-5, 5, 10_000))
        x2 = np.exp(rng.uniform(-5, 5, 10_000))
        z1, z2 = x_to_z_array(x1, x2)
        y1, y2 = z_to_x_array(z1, z2)
        return max(np.max(np.abs(y1 / x1 - 1)), np.max(np.abs(y2 / x2 - 1)))
    checks.append(_check("transform roundtrip x<->z (relative)", 1e-12, roundtrip))

    def strip():
        strip_ = support_strip(box)
        x1 = rng.uniform(box.n, box.N, 2000)
        x2 = rng.uniform(0.0, box.M, 2000)
        x2 = x2[x2 > 0]
        z1, z2 = x_to_z_array(x1, x2)
        inside = (z1 + strip_.lo <= -z2) & (-z2 <= z1 + strip_.hi)
        return float(np.count_nonzero(~inside))
    checks.append(_check("support strip contains the support (misses)", 0.0, strip))

    def sections():
        z = np.linspace(-12.0, box.z1_max - 0.05, 20)
        worst = 0.0
        for v in z:
            cs = cross_section(spec, float(v), rule)
            worst = max(worst, _rel(cs.value, cs.z_side))
        return worst
    checks.append(_check("cross-section identity, 20 z1", 1e-8, sections, vacuous))

    def section_limit():
        return _rel(estimate_Z1_C(spec, rule).C, axis_limit(spec))
    checks.append(_check("Z1/C estimate: C within 1% of axis limit", 1e-2, section_limit, vacuous))

    def omega_x_oracle():
        return max(_rel(omega_x(a, field_, alpha, rule), omega_x_brute(a, spec, alpha))
                   for a in (0.05, 0.1, 0.3, 1.0))
    checks.append(_check("omega_x vs brute-force midpoint", 1e-6, omega_x_oracle, vacuous))

    zgrid = cfg.grid
    disp0 = DisplacementProfile.zero(zgrid)

    def omega_tilde_oracle():
        return max(_rel(omega_tilde(z, disp0, spec, alpha, rule), omega_tilde_brute(z, spec, alpha))
                   for z in (-2.0, -6.0))
    checks.append(_check("omega_tilde vs brute-force midpoint", 1e-6, omega_tilde_oracle, vacuous))

    def dual_route():
        zs = np.linspace(-8.0, box.z1_max - 0.2, 10)
        errs = [consistency_omega(float(z), disp0, spec, alpha, rule) for z in zs]
        shifted = DisplacementProfile.constant(zgrid, 1.0)
        errs += [consistency_omega(float(z), shifted, spec, alpha, rule) for z in zs[::3]]
        return max(errs)
    checks.append(_check("omega_tilde vs omega_x dual route", 1e-6, dual_route, vacuous))

    pts = [PointX(float(a), float(b)) for a, b in zip(rng.uniform(0.3, 3.0, 20), rng.uniform(0.05, 1.5, 20))]

    def trace():
        worst = 0.0
        for p in pts:
            G = grad_u(p, field_, alpha, rule)
            worst = max(worst, abs(np.trace(G)) / max(np.linalg.norm(G), 1e-300))
        return worst
    checks.append(_check("trace grad u (relative)", 1e-12, trace, vacuous))

    def fd_divergence():
        h = 1e-4
        worst = 0.0
        for p in pts[:5]:
            up = velocity(PointX(p.x1 + h, p.x2), field_, alpha, rule).u1
            um = velocity(PointX(p.x1 - h, p.x2), field_, alpha, rule).u1
            vp = velocity(PointX(p.x1, p.x2 + h), field_, alpha, rule).u2
            vm = velocity(PointX(p.x1, p.x2 - h), field_, alpha, rule).u2
            d1, d2 = (up - um) / (2 * h), (vp - vm) / (2 * h)
            worst = max(worst, abs(d1 + d2) / max(float(np.linalg.norm(grad_u(p, field_, alpha, rule))), 1e-300))
        return worst
    checks.append(_check("finite-difference divergence of u (relative to |grad u|)", 1e-6, fd_divergence, vacuous))

    def rhs_shape():
        v = 2.0 * omega_tilde_grid(disp0, spec, alpha, rule, cfg.workers)
        return max(float(-np.min(v)), float(np.max(np.diff(v))))
    checks.append(_check("rhs nonnegative and nonincreasing in z1", 1e-12, rhs_shape, vacuous))

    def rk_order():
        # local error of one step against a 16-substep reference, dt halved twice
        errs = []
        for dt in (0.4, 0.2, 0.1):
            ref = disp0
            for _ in range(16):
                ref = step_rk4(ref, dt / 16, spec, alpha, rule, cfg.workers)
            one = step_rk4(disp0, dt, spec, alpha, rule, cfg.workers)
            errs.append(float(np.max(np.abs(one.values - ref.values))))
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        return max(0.0, 4.0 - min(orders))
    checks.append(_check("RK4 observed order >= 4 (shortfall)", 0.0, rk_order, vacuous))

    def picard_vs_rk():
        T = 0.05
        pic = picard_solve(T, zgrid, spec, alpha, rule, steps=16, workers=cfg.workers)
        d = disp0
        dt = None
        while d.t < T * (1 - 1e-14):
            res = step_adaptive(d, cfg.controller, spec, alpha, rule, dt=min(dt or 1e-3, T - d.t),
                                workers=cfg.workers)
            d, dt = res.disp, res.dt_next
        return float(np.max(np.abs(pic.profiles[-1].values - d.values)))
    checks.append(_check("Picard vs adaptive RK at T = 0.05 (sup)", 1e-5, picard_vs_rk, vacuous))

    def oracle_products():
        cloud = ParticleCloud.lattice(spec, 64)
        cloud = evolve(cloud, 0.02, alpha, dt_max=1e-3)
        return product_drift(cloud)
    checks.append(_check("oracle x1 x2 conservation, 20 steps", 1e-8, oracle_products, vacuous))

    def oracle_compare():
        T = 0.02
        cloud = evolve(ParticleCloud.lattice(spec, 128), T, alpha, dt_max=2e-3)
        d, dt = disp0, None
        while d.t < T * (1 - 1e-14):
            res = step_adaptive(d, cfg.controller, spec, alpha, rule, dt=min(dt or 1e-3, T - d.t),
                                workers=cfg.workers)
            d, dt = res.disp, res.dt_next
        return compare_with_z(cloud, d)
    checks.append(_check("particle oracle vs reduction at t = 0.02", 1e-4, oracle_compare, vacuous))

    rows = [asdict(c) for c in checks]
    counts = {s: sum(c.status == s for c in checks) for s in ("pass", "fail", "skipped")}
    return {"config_hash": cfg.config_hash, "tool_version": __version__, "backend": kernels.BACKEND,
            "checks": rows, "counts": counts, "ok": counts["fail"] == 0}


# --- compare / plot --------------------------------------------------------------

def run_compare(checkpoint: str | Path, K: int, dt_max: float = 1e-3) -> dict:
    """Evolve a K x K particle cloud to the checkpoint time and compare drifts."""
    ck = load_checkpoint(checkpoint)
    cfg = parse_config(ck.config_text)
    cloud = ParticleCloud.lattice(cfg.bump, K)
    t = ck.disp.t
    if t > 0.0:
        try:
            cloud = evolve(cloud, t, cfg.alpha, dt_max=dt_max)
        except ProductDrift as exc:
            return {"checkpoint": str(checkpoint), "t": t, "K": K, "status": "error", "message": str(exc)}
    return {
        "checkpoint": str(checkpoint),
        "config_hash": ck.config_hash,
        "t": t,
        "K": K,
        "status": "ok",
        "discrepancy": compare_with_z(cloud, ck.disp),
        "product_drift": product_drift(cloud) if t > 0.0 else 0.0,
    }


def run_plot(csv_path: str | Path, outdir: str | Path | None = None) -> list[Path]:
    """Re-render plots from a diagnostics CSV (and the summary beside it, if any)."""
    import json

    from .outputs import read_csv

    csv_path = Path(csv_path)
    records = read_csv(csv_path)
    fit, env = None, None
    summary = csv_path.with_name("summary.json")
    if summary.exists():
        data = json.loads(summary.read_text(encoding="utf-8"))
        fit = data.get("fit")
        if fit is not None:
            env = fit.get("envelope")
    return emit_plots(records, outdir or csv_path.parent / "plots", fit=fit, envelope_slope=env)


def timed(fn, *args, **kwargs):
    t = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t
