"""Pure numpy implementation of the hot kernels.

Mirrors ``_kernels.pyx`` operation for operation; used when the compiled
extension is unavailable or ``HYPERSQG_PURE=1`` is set.
"""
from __future__ import annotations

import math

import numpy as np

_LOG2 = math.log(2.0)


def _weighted_bump(y1, s, shift, A, c1, r1, M, profile, p):
    # omega~0(y1, s) * cosh(s - shift)^-p, sharing one exponential
    x1 = np.exp(0.5 * (y1 + s))
    x2 = np.exp(y1) / x1
    u = (x1 - c1) / r1
    phi = np.where(np.abs(u) <= 1.0, np.cos(0.5 * math.pi * u) ** 2, 0.0)
    t = x2 / M
    hump = np.cos(0.5 * math.pi * (2.0 * t - 1.0)) ** 2
    if profile == 0:
        psi = np.where(t <= 0.5, 1.0, hump)
    else:
        psi = hump
    psi = np.where((t >= 0.0) & (t <= 1.0), psi, 0.0)
    direct = np.abs(y1 + shift) >= 600.0
    with np.errstate(over="ignore", divide="ignore"):
        e = x1 * x1 * np.exp(np.where(direct, 0.0, -y1 - shift))
        w = (0.5 * (e + 1.0 / e)) ** -p
    if np.any(direct):
        v = np.abs(s - shift)
        w = np.where(direct, np.exp(-p * (v + np.log1p(np.exp(-2.0 * v)) - _LOG2)), w)
    return A * phi * psi * w


def section_integrals(y1, shift, A, c1, r1, M, profile, alpha, t_ref, w_ref, ppu, workers=1):
    """Shifted cross-sections ``G(y1) = int omega~0(y1, s) cosh(s - shift)^-(1+alpha/2) ds``.

    The s-range is the image of the support box on the line ``z1 = y1``,
    split at the images of the x2-profile breakpoints.
    """
    y1 = np.ascontiguousarray(y1, dtype=float)
    shift = np.ascontiguousarray(shift, dtype=float)
    n = y1.size
    out = np.zeros(n)
    if n == 0 or A == 0.0:
        return out
    p = 1.0 + 0.5 * alpha
    log_n = math.log(c1 - r1)
    log_N = math.log(c1 + r1)
    lo = np.maximum(2.0 * log_n - y1, y1 - 2.0 * math.log(M))
    hi = 2.0 * log_N - y1
    # interior break: x2 = M/2 for the plateau profile
    if profile == 0:
        mid = np.clip(y1 - 2.0 * math.log(0.5 * M), lo, hi)
        bounds = np.stack([lo, mid, hi], axis=1)
    else:
        bounds = np.stack([lo, hi], axis=1)
    bounds[:, -1] = np.maximum(bounds[:, -1], bounds[:, 0])
    a = bounds[:, :-1].ravel()
    b = bounds[:, 1:].ravel()
    seg_node = np.repeat(np.arange(n), bounds.shape[1] - 1)
    length = b - a
    counts = np.where(length > 0.0, np.maximum(1, np.ceil(length * ppu - 1e-12)), 0).astype(np.int64)
    total = int(counts.sum())
    if total == 0:
        return out
    pan_seg = np.repeat(np.arange(a.size), counts)
    k = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    c = counts[pan_seg].astype(float)
    h = length[pan_seg] / c
    left = a[pan_seg] + length[pan_seg] * (k / c)
    node = seg_node[pan_seg]
    s = left[:, None] + h[:, None] * t_ref[None, :]
    yy = y1[node][:, None]
    vals = _weighted_bump(yy, s, shift[node][:, None], A, c1, r1, M, profile, p)
    per_panel = (vals * w_ref[None, :]).sum(axis=1) * h
    np.add.at(out, node, per_panel)
    return out

