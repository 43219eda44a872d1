"""Command-line entry point: ``hypersqg simulate|validate|compare|plot``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, load_config
from .outputs import CheckpointError, resolve_output_dir, write_json


def _simulate(args) -> int:
    from .runner import run_simulate

    cfg = load_config(args.config, args.set)
    summary = run_simulate(cfg, resume=args.resume, max_steps=args.max_steps)
    f = summary.final
    print(f"status: {summary.status} ({summary.message})")
    print(f"steps: {summary.steps}  t: {f.t:.10g}  Z: {f.Z:.10g}  bkm: {f.bkm:.6g}")
    if summary.T_pred is not None:
        print(f"T_pred: {summary.T_pred:.10g}")
    print(f"outputs: {summary.output_dir}")
    return 0 if summary.status != "error" else 1


def _validate(args) -> int:
    from .runner import run_validate

    cfg = load_config(args.config, args.set)
    report = run_validate(cfg)
    for c in report["checks"]:
        measured = "-" if c["measured"] is None else f"{c['measured']:.3e}"
        tol = "-" if c["tolerance"] is None else f"{c['tolerance']:.1e}"
        line = f"{c['status'].upper():8s} {c['name']}: {measured} (tol {tol})"
        if c["detail"]:
            line += f"  [{c['detail']}]"
        print(line)
    counts = report["counts"]
    print(f"{counts['pass']} passed, {counts['fail']} failed, {counts['skipped']} skipped")
    out = resolve_output_dir(cfg.output_dir) / "validate.json"
    write_json(report, out)
    print(f"report: {out}")
    return 0 if report["ok"] else 1


def _compare(args) -> int:
    from .runner import run_compare

    result = run_compare(args.checkpoint, args.particles, dt_max=args.dt_max)
    print(json.dumps(result, indent=2, sort_keys=True))
    if args.output:
        write_json(result, args.output)
    return 0 if result["status"] == "ok" else 1


def _plot(args) -> int:
    from .runner import run_plot

    for path in run_plot(args.csv, args.outdir):
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypersqg", description="Hyperbolic-flow active scalar blow-up toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the z-side solver with diagnostics")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key by dotted path, e.g. grid.count=2048")
    p.add_argument("--resume", type=Path, help="continue from a checkpoint of the same config")
    p.add_argument("--max-steps", type=int, help="stop after this many accepted steps")
    p.set_defaults(func=_simulate)

    p = sub.add_parser("validate", help="run the invariant and oracle checks")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    p.set_defaults(func=_validate)

    p = sub.add_parser("compare", help="check a checkpoint against the particle oracle")
    p.add_argument("--checkpoint", required=True, type=Path)
    p.add_argument("--particles", required=True, type=int, metavar="K", help="lattice size per axis")
    p.add_argument("--dt-max", type=float, default=1e-3)
    p.add_argument("--output", type=Path, help="also write the result as JSON")
    p.set_defaults(func=_compare)

    p = sub.add_parser("plot", help="re-render SVG plots from a diagnostics CSV")
    p.add_argument("--csv", required=True, type=Path)
    p.add_argument("--outdir", type=Path)
    p.set_defaults(func=_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (CheckpointError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
