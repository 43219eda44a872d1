"""Brute-force reference integrals for the validation report.

Plain midpoint sums on uniform meshes, combined with one Richardson step.
They share nothing with the Gauss-Legendre machinery beyond the analytic
initial data, so agreement between the two is meaningful.
"""
from __future__ import annotations

import math

import numpy as np

from .initial_data import BumpSpec, omega0_x


def _mid(lo, hi, n):
    h = (hi - lo) / n
    return lo + h * (np.arange(n) + 0.5), h


def _omega_x_mid(a: float, spec: BumpSpec, alpha: float, n: int) -> float:
    box = spec.box
    y1, h1 = _mid(box.n, box.N, n)
    lo = np.minimum(np.maximum(a / y1, 0.0), box.M)
    u = (np.arange(n) + 0.5) / n
    y2 = lo[:, None] + (box.M - lo)[:, None] * u[None, :]
    h2 = (box.M - lo) / n
    f = omega0_x(spec, y1[:, None], y2) / (y1[:, None] ** 2 + y2 ** 2) ** (1.0 + 0.5 * alpha)
    return float(h1 * np.sum(h2 * f.sum(axis=1)))


def omega_x_brute(a: float, spec: BumpSpec, alpha: float, n: int = 2048) -> float:
    """``Omega(a)`` from column-wise midpoint sums (n x n) with Richardson."""
    fine = _omega_x_mid(a, spec, alpha, n)
    coarse = _omega_x_mid(a, spec, alpha, n // 2)
    return (4.0 * fine - coarse) / 3.0


def _omega_tilde_mid(z1: float, spec: BumpSpec, alpha: float, n: int) -> float:
    # zero displacement; z-side integrand with the exact x -> z Jacobian
    box = spec.box
    top = math.log(box.N * box.M)
    if z1 >= top:
        return 0.0
    p = 1.0 + 0.5 * alpha
    y1, h1 = _mid(z1, top, n)
    lo = np.maximum(2.0 * math.log(box.n) - y1, y1 - 2.0 * math.log(box.M))
    hi = 2.0 * math.log(box.N) - y1
    hi = np.maximum(hi, lo)
    u = (np.arange(n) + 0.5) / n
    s = lo[:, None] + (hi - lo)[:, None] * u[None, :]
    x1 = np.exp(0.5 * (y1[:, None] + s))
    x2 = np.exp(0.5 * (y1[:, None] - s))
    f = omega0_x(spec, x1, x2) / np.cosh(s) ** p
    inner = (hi - lo) / n * f.sum(axis=1)
    c = 2.0 ** -(2.0 + 0.5 * alpha)
    return float(c * h1 * np.sum(np.exp(-0.5 * alpha * y1) * inner))


def omega_tilde_brute(z1: float, spec: BumpSpec, alpha: float, n: int = 4096) -> float:
    """``Omega~(z1)`` at zero displacement from n x n midpoint sums with Richardson."""
    fine = _omega_tilde_mid(z1, spec, alpha, n)
    coarse = _omega_tilde_mid(z1, spec, alpha, n // 2)
    return (4.0 * fine - coarse) / 3.0


def axis_limit(spec: BumpSpec, n: int = 20000) -> float:
    """``2 int omega0(x1, 0) / x1 dx1``: the limit of the cross-sections as z1 -> -inf."""
    box = spec.box
    x1, h = _mid(box.n, box.N, n)
    return float(2.0 * h * np.sum(omega0_x(spec, x1, np.zeros_like(x1)) / x1))
