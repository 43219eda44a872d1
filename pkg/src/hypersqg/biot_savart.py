"""Quadrature of the hyperbolic Biot-Savart integrals.

x-side
    ``Omega(a) = int_{y1 y2 >= a} omega(y) / |y|^(2+alpha) dy`` over the
    quarter plane, with ``a = x1 x2``; velocity ``u = (-x1 Omega, x2 Omega)``.
z-side
    ``Omega~(z1) = c_alpha int_{z1}^inf e^{-alpha y1/2} G(y1) dy1`` with
    ``G(y1) = int omega~(y1, y2) cosh(y2)^-(1+alpha/2) dy2`` and
    ``c_alpha = 2^-(2+alpha/2)``, the Jacobian of the change to
    log-hyperbolic coordinates.  The two agree identically:
    ``Omega~(z1) = Omega(e^{z1})``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import PointX
from .initial_data import BumpSpec, omega0_x
from .profile import DisplacementProfile
from .quadrature import QuadratureRule, checked

PROFILE_CODES = {"plateau": 0, "lifted": 1}


class CoverageError(ValueError):
    """The displacement grid does not cover the requested z1 range."""


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in the open interval (0, 1), got {alpha}")
    return alpha


def z_prefactor(alpha: float) -> float:
    return 2.0 ** (-2.0 - 0.5 * alpha)


# --- scalar fields on the quarter plane --------------------------------------

class InitialField:
    """The initial data as a field accessor for the x-side quadrature."""

    def __init__(self, spec: BumpSpec):
        self.spec = spec
        box = spec.box
        self.n, self.N, self.M = box.n, box.N, box.M
        self.x1_breaks = spec.x1_breaks
        self.x2_breaks = spec.x2_breaks
        self.is_zero = spec.is_zero

    def __call__(self, y1, y2):
        return omega0_x(self.spec, y1, y2)


class TransportedField:
    """``omega(y, t) = omega0(X^-1(y, t))`` for the state described by ``disp``.

    A particle on line ``z1`` has been moved along its hyperbola by
    ``x1 -> x1 e^{-X/2}``, ``x2 -> x2 e^{X/2}``.  Lines below the grid reuse
    the lowest grid value.
    """

    def __init__(self, spec: BumpSpec, disp: DisplacementProfile):
        self.spec = spec
        self.disp = disp
        xmax = float(np.max(disp.values))
        box = spec.box
        self.n = box.n * math.exp(-0.5 * xmax)
        self.N = box.N
        self.M = box.M * math.exp(0.5 * xmax)
        self.is_zero = spec.is_zero
        if disp.is_constant:
            c = float(disp.values[0])
            self.x1_breaks = tuple(b * math.exp(-0.5 * c) for b in spec.x1_breaks)
            self.x2_breaks = tuple(b * math.exp(0.5 * c) for b in spec.x2_breaks)
        else:
            self.x1_breaks = (self.n, self.N)
            self.x2_breaks = (self.M,)

    def __call__(self, y1, y2):
        y1 = np.asarray(y1, dtype=float)
        y2 = np.asarray(y2, dtype=float)
        with np.errstate(divide="ignore"):
            z1 = np.log(y1 * y2)
        z1 = np.where(np.isfinite(z1), z1, self.disp.grid.z1_min)
        shift = self.disp.at(z1)
        return omega0_x(self.spec, y1 * np.exp(0.5 * shift), y2 * np.exp(-0.5 * shift))


# --- x-side integrals --------------------------------------------------------

def _omega_x_raw(a: float, field, alpha: float, rule: QuadratureRule) -> float:
    if field.is_zero:
        return 0.0
    p = 1.0 + 0.5 * alpha
    n, N, M = field.n, field.N, field.M
    lo = n if a <= 0.0 else max(n, a / M)
    if lo >= N:
        return 0.0
    outer_breaks = list(field.x1_breaks)
    if a > 0.0:
        outer_breaks += [a / b for b in field.x2_breaks]
    xs, ws = rule.nodes_weights(rule.panel_edges([lo, *[b for b in outer_breaks if lo < b < N], N]))
    inner = np.empty_like(xs)
    for i, y1 in enumerate(xs):
        y2_lo = a / y1
        inner[i] = rule.integrate(
            lambda y2: field(np.full_like(y2, y1), y2) / (y1 * y1 + y2 * y2) ** p,
            y2_lo,
            M,
            field.x2_breaks,
        )
    return float(np.dot(ws, inner))


def _omega_a_raw(a: float, field, alpha: float, rule: QuadratureRule) -> float:
    if field.is_zero:
        return 0.0
    p = 1.0 + 0.5 * alpha
    n, N, M = field.n, field.N, field.M
    lo = max(n, a / M)
    if lo >= N:
        return 0.0
    breaks = list(field.x1_breaks) + [a / b for b in field.x2_breaks]

    def f(y1):
        y2 = a / y1
        return field(y1, y2) / (y1 * (y1 * y1 + y2 * y2) ** p)

    return -rule.integrate(f, lo, N, breaks)


def omega_x(a: float, field, alpha: float, rule: QuadratureRule, check: bool = True, rtol: float = 1e-9) -> float:
    """``Omega`` at every point of the hyperbola ``x1 x2 = a``.

    With ``check`` the integral is repeated with panels halved and a
    :class:`QuadratureError` raised if the two differ by more than ``rtol``.
    """
    alpha = check_alpha(alpha)
    if a < 0.0:
        raise ValueError(f"a = x1*x2 must be nonnegative, got {a}")
    if not check:
        return _omega_x_raw(a, field, alpha, rule)
    return checked(lambda r: _omega_x_raw(a, field, alpha, r), rule, rtol, 1e-300, f"Omega(a={a:g})")


def omega_a(a: float, field, alpha: float, rule: QuadratureRule, check: bool = True, rtol: float = 1e-9) -> float:
    """``dOmega/da``: minus the kernel integrated along the hyperbola ``y1 y2 = a``."""
    alpha = check_alpha(alpha)
    if not a > 0.0:
        raise ValueError(f"omega_a needs a > 0, got {a}")
    if not check:
        return _omega_a_raw(a, field, alpha, rule)
    return checked(lambda r: _omega_a_raw(a, field, alpha, r), rule, rtol, 1e-300, f"Omega_a(a={a:g})")


@dataclass(frozen=True)
class VelocityX:
    u1: float
    u2: float


def velocity(p: PointX, field, alpha: float, rule: QuadratureRule, check: bool = True) -> VelocityX:
    if p.x1 < 0.0 or p.x2 < 0.0:
        raise ValueError(f"point ({p.x1}, {p.x2}) is outside the quarter plane")
    om = omega_x(p.x1 * p.x2, field, alpha, rule, check)
    return VelocityX(-p.x1 * om, p.x2 * om)


def grad_u(p: PointX, field, alpha: float, rule: QuadratureRule, check: bool = True) -> np.ndarray:
    """Velocity gradient laid out as ``G[i, j] = d u_j / d x_i``.

    Uses ``Omega_{x1} = x2 Omega_a`` and ``Omega_{x2} = x1 Omega_a``, so the
    trace vanishes identically.
    """
    if not (p.x1 > 0.0 and p.x2 > 0.0):
        raise ValueError("grad_u needs x1 > 0 and x2 > 0")
    a = p.x1 * p.x2
    om = omega_x(a, field, alpha, rule, check)
    oa = omega_a(a, field, alpha, rule, check)
    om1 = p.x2 * oa
    om2 = p.x1 * oa
    return np.array(
        [
            [-om - p.x1 * om1, p.x2 * om1],
            [-p.x1 * om2, om + p.x2 * om2],
        ]
    )


# --- z-side integrals --------------------------------------------------------

def y1_kinks(spec: BumpSpec) -> list[float]:
    """Lines ``z1`` where breakpoints of the cross-section integrand collide."""
    return sorted({math.log(b1 * b2) for b1 in spec.x1_breaks for b2 in spec.x2_breaks})


def _outer_edges(z_lo: float, z_hi: float, grid_nodes: np.ndarray, spec: BumpSpec, rule: QuadratureRule) -> np.ndarray:
    inner = [z for z in grid_nodes if z_lo < z < z_hi] + [k for k in y1_kinks(spec) if z_lo < k < z_hi]
    return rule.panel_edges([z_lo, *inner, z_hi])


def _outer_order(rule: QuadratureRule, edges: np.ndarray) -> QuadratureRule:
    # keep the rule's node density when grid cells are shorter than its panels
    width = float(np.max(np.diff(edges))) if edges.size > 1 else 1.0
    order = max(5, min(rule.order, math.ceil(rule.order * rule.panels_per_unit * width)))
    if order == rule.order:
        return rule
    return QuadratureRule(order, rule.panels_per_unit, rule.eps_tail)


def _panel_contributions(edges, disp, spec, alpha, rule, workers):
    outer = _outer_order(rule, edges)
    y, w = outer.nodes_weights(edges)
    shift = disp.at(y)
    g = kernels.section_integrals(
        y, shift, spec.A, spec.c1, spec.r1, spec.M, PROFILE_CODES[spec.profile], alpha,
        rule.reference_nodes, rule.reference_weights, float(rule.panels_per_unit), workers,
    )
    dens = np.exp(-0.5 * alpha * y) * g
    contrib = (w * dens).reshape(-1, outer.order).sum(axis=1)
    if rule.eps_tail > 0.0 and contrib.size:
        # drop negligible trailing panels at the top of the support
        peak = np.maximum.accumulate(np.abs(contrib))
        contrib = np.where(np.abs(contrib) < rule.eps_tail * peak, 0.0, contrib)
    return contrib


def _omega_tilde_raw(z1, disp, spec, alpha, rule, workers=1):
    top = spec.box.z1_max
    if spec.is_zero or z1 >= top:
        return 0.0
    edges = _outer_edges(z1, top, disp.nodes, spec, rule)
    contrib = _panel_contributions(edges, disp, spec, alpha, rule, workers)
    return z_prefactor(alpha) * float(contrib[::-1].sum())


def _check_cover(z1: float, disp: DisplacementProfile, spec: BumpSpec) -> None:
    top = spec.box.z1_max
    if z1 < top and (z1 < disp.grid.z1_min - 1e-12 or disp.grid.z1_max < top):
        raise CoverageError(
            f"displacement grid [{disp.grid.z1_min}, {disp.grid.z1_max}] does not cover "
            f"[{z1}, {top}]"
        )


def omega_tilde(z1: float, disp: DisplacementProfile, spec: BumpSpec, alpha: float, rule: QuadratureRule,
                check: bool = True, rtol: float = 1e-9, workers: int = 1) -> float:
    """``Omega~(z1, t)`` for the shifted data described by ``disp``."""
    alpha = check_alpha(alpha)
    _check_cover(z1, disp, spec)
    if not check:
        return _omega_tilde_raw(z1, disp, spec, alpha, rule, workers)
    return checked(lambda r: _omega_tilde_raw(z1, disp, spec, alpha, r, workers), rule, rtol, 1e-300,
                   f"Omega~(z1={z1:g})")


def omega_tilde_grid(disp: DisplacementProfile, spec: BumpSpec, alpha: float, rule: QuadratureRule,
                     workers: int = 1) -> np.ndarray:
    """``Omega~`` at every grid node, sharing one sweep of cross-sections.

    The outer integral is accumulated from the top of the support downward,
    so each node costs one panel sum.
    """
    alpha = check_alpha(alpha)
    nodes = disp.nodes
    out = np.zeros(nodes.size)
    top = spec.box.z1_max
    if spec.is_zero:
        return out
    _check_cover(float(nodes[0]), disp, spec)
    edges = _outer_edges(float(nodes[0]), top, nodes, spec, rule)
    contrib = _panel_contributions(edges, disp, spec, alpha, rule, workers)
    # tail[k] = integral from edges[k] to top
    tail = np.zeros(edges.size)
    tail[:-1] = np.cumsum(contrib[::-1])[::-1]
    below = nodes < top
    idx = np.searchsorted(edges, nodes[below])
    if not np.all(edges[idx] == nodes[below]):
        raise AssertionError("grid nodes must be panel edges")
    out[below] = z_prefactor(alpha) * tail[idx]
    return out


def consistency_omega(z1: float, disp: DisplacementProfile, spec: BumpSpec, alpha: float,
                      rule: QuadratureRule) -> float:
    """Relative gap between the z-side and x-side routes to ``Omega`` on line ``z1``."""
    zt = omega_tilde(z1, disp, spec, alpha, rule)
    xs = omega_x(math.exp(z1), TransportedField(spec, disp), alpha, rule)
    if zt == 0.0 and xs == 0.0:
        return 0.0
    return abs(zt - xs) / max(abs(zt), 1e-300)
