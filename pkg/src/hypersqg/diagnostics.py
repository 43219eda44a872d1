"""Blow-up instrumentation for the reduced solution.

``F(z1, t) = z1 + X(z1, t)`` and its largest root ``Z(t)`` track the line whose
unit-height particle has just crossed the diagonal ``x1 = x2``.  ``Z`` running
off to ``-inf`` in finite time is the blow-up mechanism; the indicator
``W = e^{alpha Z / 2}`` must then decrease at least linearly.  The gradient
accumulator ``bkm = int_0^t sup |grad omega| ds`` is the continuation
criterion.
"""
from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

import numpy as np

from . import kernels
from .biot_savart import PROFILE_CODES
from .initial_data import BumpSpec, grad_omega0_z_array, omega0_x
from .profile import DisplacementProfile
from .quadrature import QuadratureRule

CSV_HEADER = "t,Z,W,bkm,sup_grad,sup_omega_big,support_max_x1"


class EscapedGrid(RuntimeError):
    """``F`` has no root on the grid: ``Z`` has passed below ``z1_min``."""


class InsufficientData(ValueError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    Z: float
    W: float
    bkm: float
    sup_grad: float
    sup_omega_big: float
    support_max_x1: float

    def as_row(self) -> tuple[float, ...]:
        return astuple(self)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


# --- Z(t) -------------------------------------------------------------------

def root_function(disp: DisplacementProfile) -> np.ndarray:
    return disp.nodes + disp.values


def locate_Z(disp: DisplacementProfile, xtol: float = 1e-10) -> float:
    """Largest root of ``F = z1 + X`` on the grid.

    The last sign change of the nodal values is bracketed and narrowed by
    bisection on the cubic interpolant of ``X``; the final bracket is closed
    with a secant step, which is exact where ``F`` is linear.
    """
    z = disp.nodes
    F = z + disp.values
    if F[-1] <= 0.0:
        raise PreconditionError(f"F must be positive at the top of the grid, got {F[-1]:.3e}")
    cross = np.nonzero((F[:-1] <= 0.0) & (F[1:] > 0.0))[0]
    if cross.size == 0:
        raise EscapedGrid(f"F(z1_min) = {F[0]:.6g} > 0 at t = {disp.t:.12g}: root below the grid floor")
    i = int(cross[-1])
    a, b = float(z[i]), float(z[i + 1])
    fa, fb = float(F[i]), float(F[i + 1])
    if fa == 0.0:
        return a
    f = lambda x: x + float(disp.at(x))
    while b - a > xtol:
        m = 0.5 * (a + b)
        fm = f(m)
        if fm <= 0.0:
            a, fa = m, fm
        else:
            b, fb = m, fm
    return a - fa * (b - a) / (fb - fa)


# --- sup |grad omega| on a Lagrangian lattice --------------------------------

class GradientLattice:
    """Fixed material labels for gradient and support sampling.

    Labels cover the support box: ``k`` columns in x1, ``k`` uniform rows in
    x2 plus ``k`` log-spaced rows reaching down to line ``z1_floor``, so lines
    close to the x1-axis are represented.  ``jitter`` (fraction of a cell,
    drawn from ``seed``) perturbs the labels reproducibly.
    """

    def __init__(self, spec: BumpSpec, z1_floor: float, k: int = 64, seed: int = 0, jitter: float = 0.25):
        box = spec.box
        rng = np.random.default_rng(seed)
        h1 = (box.N - box.n) / k
        x1 = box.n + h1 * (np.arange(k) + 0.5 + jitter * rng.uniform(-0.5, 0.5, k))
        h2 = box.M / k
        x2_lin = h2 * (np.arange(k) + 0.5 + jitter * rng.uniform(-0.5, 0.5, k))
        lo = math.log(math.exp(z1_floor) / box.n)
        hi = math.log(h2 / 2.0)
        if hi > lo:
            step = (hi - lo) / k
            x2_log = np.exp(lo + step * (np.arange(k) + 0.5 + jitter * rng.uniform(-0.5, 0.5, k)))
        else:
            x2_log = np.empty(0)
        x2 = np.concatenate([x2_log, x2_lin])
        X1, X2 = np.meshgrid(x1, x2, indexing="ij")
        X1, X2 = X1.ravel(), X2.ravel()
        keep = np.log(X1 * X2) >= z1_floor
        self.x1 = X1[keep]
        self.x2 = X2[keep]
        self.z1 = np.log(self.x1 * self.x2)
        self.s = np.log(self.x1 / self.x2)
        self.value = omega0_x(spec, self.x1, self.x2)
        self.inside = self.value > 0.0
        self.g1, self.g2 = grad_omega0_z_array(spec, self.z1, self.s)

    def __len__(self) -> int:
        return self.x1.size


def sup_grad_omega(disp: DisplacementProfile, lattice: GradientLattice) -> float:
    """``max |grad_x omega(., t)|`` over the displaced lattice.

    On line ``z1`` the solution is ``omega~0(z1, z2 + X(z1))``, so
    ``d/dz1 = g1 + g2 X'`` and ``d/dz2 = g2`` at the label; these are pushed to
    x through ``d/dx1 = (d/dz1 + d/dz2)/x1``, ``d/dx2 = (d/dz1 - d/dz2)/x2``.
    """
    if not lattice.inside.any():
        return 0.0
    shift = disp.at(lattice.z1)
    slope = disp.slope_at(lattice.z1)
    d1 = lattice.g1 + lattice.g2 * slope
    d2 = lattice.g2
    x1 = lattice.x1 * np.exp(-0.5 * shift)
    x2 = lattice.x2 * np.exp(0.5 * shift)
    gx1 = (d1 + d2) / x1
    gx2 = (d1 - d2) / x2
    return float(np.max(np.hypot(gx1, gx2)))


def support_extent(disp: DisplacementProfile, lattice: GradientLattice) -> tuple[float, float]:
    """Largest and smallest current x1 over labels where the data is positive.

    Uses linear interpolation of the profile, which keeps the interpolated
    drift nonnegative and nondecreasing in time like the nodal values.
    """
    if not lattice.inside.any():
        return 0.0, 0.0
    shift = np.interp(lattice.z1[lattice.inside], disp.nodes, disp.values)
    x1 = lattice.x1[lattice.inside] * np.exp(-0.5 * shift)
    return float(x1.max()), float(x1.min())


# --- accumulators and fits ----------------------------------------------------

def bkm_update(prev: DiagnosticsRecord, t_new: float, sup_grad_new: float) -> float:
    """Trapezoid increment of ``int sup|grad omega| dt`` added to ``prev.bkm``."""
    if not t_new > prev.t:
        raise ValueError(f"time must increase: {t_new!r} <= {prev.t!r}")
    return prev.bkm + 0.5 * (t_new - prev.t) * (prev.sup_grad + sup_grad_new)


@dataclass(frozen=True)
class BlowupFit:
    t0: float
    C_fit: float
    T_pred: float
    slope: float
    slopes: tuple[float, ...]
    envelope: float | None
    max_violation: float | None
    envelope_ok: bool | None
    window: tuple[int, int]


def blowup_fit(records, Z1: float, alpha: float, C_floor: float | None = None,
               z1_min: float | None = None, margin: float = 0.10) -> BlowupFit:
    """Fit ``W = e^{alpha Z / 2}`` by a line after ``t0`` and test the slope envelope.

    ``t0`` is the first record with ``Z <= Z1 - 1``.  The window ends at the
    last record with ``Z > z1_min + 2`` (when ``z1_min`` is given).  With
    ``C_floor``, every discrete slope of ``W`` must satisfy
    ``slope <= -(alpha/2) C_floor`` up to ``margin`` of the bound.
    """
    records = list(records)
    t = np.array([r.t for r in records])
    Z = np.array([r.Z for r in records])
    after = np.nonzero(Z <= Z1 - 1.0)[0]
    if after.size == 0:
        raise InsufficientData(f"no record reaches Z <= Z1 - 1 = {Z1 - 1.0:.4g}")
    start = int(after[0])
    stop = len(records)
    if z1_min is not None:
        ok = np.nonzero(Z > z1_min + 2.0)[0]
        stop = int(ok[-1]) + 1 if ok.size else start
    if stop - start < 2:
        raise InsufficientData(f"need at least two records in the fit window, have {stop - start}")
    tw = t[start:stop]
    W = np.exp(0.5 * alpha * Z[start:stop])
    m, b = np.polyfit(tw, W, 1)
    if not m < 0.0:
        raise InsufficientData(f"W is not decreasing in the fit window (slope {m:.3e})")
    slopes = np.diff(W) / np.diff(tw)
    envelope = max_violation = ok_flag = None
    if C_floor is not None:
        envelope = -0.5 * alpha * C_floor
        excess = slopes - envelope
        max_violation = float(np.max(excess) / abs(envelope))
        ok_flag = bool(max_violation <= margin)
    return BlowupFit(
        t0=float(t[start]),
        C_fit=float(-2.0 * m / alpha),
        T_pred=float(-b / m),
        slope=float(m),
        slopes=tuple(float(s) for s in slopes),
        envelope=envelope,
        max_violation=max_violation,
        envelope_ok=ok_flag,
        window=(start, stop),
    )


def envelope_offset(spec: BumpSpec) -> float:
    box = spec.box
    return 2.0 * max(abs(math.log(box.n)), abs(math.log(box.N)))


def lower_bound_envelope(disp: DisplacementProfile, spec: BumpSpec, y1: float, B: float, alpha: float,
                         C_floor: float, Z1: float, rule: QuadratureRule) -> tuple[float, float]:
    """Shifted cross-section on line ``y1`` and its guaranteed floor.

    measured = ``int omega~(y1, y2, t) cosh(y2)^-(1+alpha/2) dy2``;
    bound = ``C_floor exp(-(1+alpha/2)(|y1| + B + L))`` with
    ``L = 2 max(|log n|, |log N|)``, valid whenever ``X(y1) <= B`` and
    ``y1 <= Z1``.
    """
    if not y1 <= Z1:
        raise PreconditionError(f"y1 = {y1} must not exceed Z1 = {Z1}")
    shift = float(disp.at(y1))
    if shift > B:
        raise PreconditionError(f"X(y1) = {shift:.6g} exceeds B = {B:.6g}")
    p = 1.0 + 0.5 * alpha
    measured = float(kernels.section_integrals(
        np.array([y1]), np.array([shift]), spec.A, spec.c1, spec.r1, spec.M, PROFILE_CODES[spec.profile],
        alpha, rule.reference_nodes, rule.reference_weights, float(rule.panels_per_unit))[0])
    bound = C_floor * math.exp(-p * (abs(y1) + B + envelope_offset(spec)))
    return measured, bound
