"""Minimal SVG line plots, written by hand to avoid a plotting dependency."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 400
MARGIN = (70, 20, 30, 50)  # left, right, top, bottom
COLORS = ("#1f4e99", "#c0392b", "#27864b", "#7d3c98")


@dataclass
class Series:
    label: str
    x: list[float]
    y: list[float]
    dashed: bool = False
    markers: bool = False


@dataclass
class Figure:
    title: str
    xlabel: str
    ylabel: str
    series: list[Series] = field(default_factory=list)
    log_y: bool = False


def _range(values: list[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if hi - lo <= 1e-12 * max(1.0, abs(hi)):
        pad = 0.5 if hi == 0.0 else 0.05 * abs(hi)
        return lo - pad, hi + pad
    pad = 0.04 * (hi - lo)
    return lo - pad, hi + pad


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=10 * mag)
    first = math.ceil(lo / step) * step
    out = []
    v = first
    while v <= hi + 1e-9 * step:
        out.append(0.0 if abs(v) < 1e-12 * step else v)
        v += step
    return out


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def render_svg(fig: Figure) -> str:
    """Render ``fig`` as a standalone SVG document."""
    tf = (lambda v: math.log10(v)) if fig.log_y else (lambda v: v)
    pts = []
    for s in fig.series:
        pts.append([(x, tf(y)) for x, y in zip(s.x, s.y)
                    if math.isfinite(x) and math.isfinite(y) and (y > 0.0 or not fig.log_y)])
    xs = [p[0] for ser in pts for p in ser] or [0.0]
    ys = [p[1] for ser in pts for p in ser] or [0.0]
    x0, x1 = _range(xs)
    y0, y1 = _range(ys)
    left, right, top, bottom = MARGIN
    pw, ph = WIDTH - left - right, HEIGHT - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (y1 - y) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" font-size="13">{escape(fig.title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    for tx in _ticks(x0, x1):
        X = px(tx)
        out.append(f'<line x1="{X:.2f}" y1="{top + ph}" x2="{X:.2f}" y2="{top + ph + 4}" stroke="#444"/>')
        out.append(f'<text x="{X:.2f}" y="{top + ph + 16}" text-anchor="middle">{_fmt(tx)}</text>')
    for ty in _ticks(y0, y1):
        Y = py(ty)
        label = _fmt(10.0 ** ty) if fig.log_y else _fmt(ty)
        out.append(f'<line x1="{left - 4}" y1="{Y:.2f}" x2="{left}" y2="{Y:.2f}" stroke="#444"/>')
        out.append(f'<text x="{left - 6}" y="{Y + 4:.2f}" text-anchor="end">{label}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{escape(fig.xlabel)}</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.1f})">{escape(fig.ylabel)}</text>')
    out.append(f'<clipPath id="plot"><rect x="{left}" y="{top}" width="{pw}" height="{ph}"/></clipPath>')
    for k, (s, ser) in enumerate(zip(fig.series, pts)):
        color = COLORS[k % len(COLORS)]
        path = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in ser)
        dash = ' stroke-dasharray="6,4"' if s.dashed else ""
        if len(ser) > 1:
            out.append(f'<polyline clip-path="url(#plot)" fill="none" stroke="{color}" stroke-width="1.5"'
                       f'{dash} points="{path}"/>')
        if s.markers or len(ser) == 1:
            for x, y in ser:
                out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="2.2" fill="{color}"/>')
        ly = top + 14 + 14 * k
        out.append(f'<line x1="{left + pw - 150}" y1="{ly - 4}" x2="{left + pw - 130}" y2="{ly - 4}" '
                   f'stroke="{color}" stroke-width="1.5"{dash}/>')
        out.append(f'<text x="{left + pw - 125}" y="{ly}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(fig: Figure, path: str | os.PathLike) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(render_svg(fig), encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write plot {path}: {exc}") from exc
    return path


def emit_plots(records, outdir: str | os.PathLike, fit: dict | None = None,
               envelope_slope: float | None = None) -> list[Path]:
    """Z, W and BKM plots for a record sequence.

    ``fit`` holds ``slope``, ``T_pred`` and ``t0`` of the W line; with
    ``envelope_slope`` a line of that slope is drawn through W at ``t0``.
    """
    records = list(records)
    if not records:
        raise ValueError("emit_plots needs at least one record")
    outdir = Path(outdir)
    t = [r.t for r in records]
    Z = [r.Z for r in records]
    W = [r.W for r in records]
    bkm = [r.bkm for r in records]

    wseries = [Series("W = exp(alpha Z / 2)", t, W, markers=True)]
    if fit is not None:
        m, T = fit["slope"], fit["T_pred"]
        ta = fit["t0"]
        wseries.append(Series(f"fit, slope {m:.4g}", [ta, T], [m * (ta - T), 0.0], dashed=True))
        if envelope_slope is not None:
            w0 = W[[r.t for r in records].index(ta)] if ta in t else m * (ta - T)
            tb = min(T, ta + w0 / -envelope_slope) if envelope_slope < 0 else T
            wseries.append(Series(f"envelope, slope {envelope_slope:.4g}", [ta, tb],
                                  [w0, w0 + envelope_slope * (tb - ta)], dashed=True))
    figs = {
        "Z.svg": Figure("largest root Z(t)", "t", "Z", [Series("Z", t, Z, markers=True)]),
        "W.svg": Figure("blow-up indicator", "t", "W", wseries),
        "bkm.svg": Figure("BKM accumulator", "t", "int sup|grad omega| dt",
                          [Series("bkm", t, bkm, markers=True)], log_y=True),
    }
    return [write_svg(fig, outdir / name) for name, fig in figs.items()]
