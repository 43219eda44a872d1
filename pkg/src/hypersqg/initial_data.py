"""Admissible initial data: a nonnegative C^1 bump sitting on the x1-axis.

The profile is a product ``A * phi((x1 - c1)/r1) * psi(x2/M)`` with
``phi(s) = cos^2(pi s / 2)`` on ``|s| <= 1``.  Two x2-profiles are available:

``plateau``
    ``psi = 1`` on ``[0, 1/2]`` then a cos^2 descent to 0 at 1.  Nonzero on the
    x1-axis; this is the family used for blow-up runs.
``lifted``
    cos^2 hump vanishing at both 0 and 1.  Identically zero on the axis and
    only useful as a negative control.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .geometry import PointX, PointZ, SupportBox, z_to_x_array
from .quadrature import QuadratureRule, checked

PROFILES = ("plateau", "lifted")
_HALF_PI = 0.5 * math.pi


class AxisDegenerateError(ValueError):
    """The data vanishes on the x1-axis, so the cross-section has no positive floor."""


@dataclass(frozen=True)
class BumpSpec:
    A: float = 1.0
    c1: float = 2.0
    r1: float = 1.0
    M: float = 1.0
    profile: str = "plateau"

    def __post_init__(self) -> None:
        if not self.A >= 0.0:
            raise ValueError(f"amplitude A must be >= 0, got {self.A}")
        if not self.r1 > 0.0:
            raise ValueError(f"radius r1 must be positive, got {self.r1}")
        if not self.c1 - self.r1 > 0.0:
            raise ValueError(f"support must stay away from x1 = 0: c1 - r1 = {self.c1 - self.r1}")
        if not self.M > 0.0:
            raise ValueError(f"height M must be positive, got {self.M}")
        if self.profile not in PROFILES:
            raise ValueError(f"profile must be one of {PROFILES}, got {self.profile!r}")

    @property
    def box(self) -> SupportBox:
        return SupportBox(self.c1 - self.r1, self.c1 + self.r1, self.M)

    @property
    def is_zero(self) -> bool:
        return self.A == 0.0

    @property
    def x1_breaks(self) -> tuple[float, ...]:
        return (self.c1 - self.r1, self.c1 + self.r1)

    @property
    def x2_breaks(self) -> tuple[float, ...]:
        """Points in ``(0, M]`` where the x2-profile is not smooth."""
        if self.profile == "plateau":
            return (0.5 * self.M, self.M)
        return (self.M,)

    def to_dict(self) -> dict:
        return asdict(self)


# --- one-dimensional profiles ---------------------------------------------

def _phi(s):
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) <= 1.0
    return np.where(inside, np.cos(_HALF_PI * s) ** 2, 0.0)


def _dphi(s):
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) <= 1.0
    return np.where(inside, -_HALF_PI * np.sin(math.pi * s), 0.0)


def _psi(t, profile: str):
    t = np.asarray(t, dtype=float)
    u = 2.0 * t - 1.0
    hump = np.cos(_HALF_PI * u) ** 2
    if profile == "plateau":
        val = np.where(t <= 0.5, 1.0, hump)
    else:
        val = hump
    return np.where((t >= 0.0) & (t <= 1.0), val, 0.0)


def _dpsi(t, profile: str):
    t = np.asarray(t, dtype=float)
    u = 2.0 * t - 1.0
    slope = -math.pi * np.sin(math.pi * u)
    if profile == "plateau":
        slope = np.where(t <= 0.5, 0.0, slope)
    return np.where((t >= 0.0) & (t <= 1.0), slope, 0.0)


# --- evaluation -------------------------------------------------------------

def omega0_x(spec: BumpSpec, x1, x2):
    """Vectorized initial data in x-coordinates."""
    return spec.A * _phi((np.asarray(x1, float) - spec.c1) / spec.r1) * _psi(
        np.asarray(x2, float) / spec.M, spec.profile
    )


def grad_omega0_x(spec: BumpSpec, x1, x2):
    s = (np.asarray(x1, float) - spec.c1) / spec.r1
    t = np.asarray(x2, float) / spec.M
    d1 = spec.A * _dphi(s) * _psi(t, spec.profile) / spec.r1
    d2 = spec.A * _phi(s) * _dpsi(t, spec.profile) / spec.M
    return d1, d2


def omega0_z(spec: BumpSpec, z1, z2):
    x1, x2 = z_to_x_array(z1, z2)
    return omega0_x(spec, x1, x2)


def grad_omega0_z_array(spec: BumpSpec, z1, z2):
    """Partial derivatives of the z-side data in ``(z1, z2)``."""
    x1, x2 = z_to_x_array(z1, z2)
    d1, d2 = grad_omega0_x(spec, x1, x2)
    a = x1 * d1
    b = x2 * d2
    return 0.5 * (a + b), 0.5 * (a - b)


def eval_omega0_x(spec: BumpSpec, p: PointX) -> float:
    return float(omega0_x(spec, p.x1, p.x2))


def eval_omega0_z(spec: BumpSpec, q: PointZ) -> float:
    return float(omega0_z(spec, q.z1, q.z2))


def grad_omega0_z(spec: BumpSpec, q: PointZ) -> tuple[float, float]:
    g1, g2 = grad_omega0_z_array(spec, q.z1, q.z2)
    return float(g1), float(g2)


# --- cross-sections along hyperbolas ----------------------------------------

@dataclass(frozen=True)
class CrossSection:
    """Integral of the z-side data across the line ``z1 = const``.

    ``value`` comes from the x-side formula; ``z_side`` from direct
    quadrature along the line.  The two agree by the change of variables
    ``z2 = 2 log x1 - z1``.
    """

    z1: float
    value: float
    z_side: float


def _section_x(spec: BumpSpec, z1: float, rule: QuadratureRule) -> float:
    n, N = spec.x1_breaks
    a = math.exp(z1)
    lo = max(n, a / spec.M)
    if spec.is_zero or lo >= N:
        return 0.0
    breaks = [a / b for b in spec.x2_breaks]
    f = lambda x1: omega0_x(spec, x1, a / x1) / x1
    return 2.0 * rule.integrate(f, lo, N, breaks)


def _section_z(spec: BumpSpec, z1: float, rule: QuadratureRule) -> float:
    n, N = spec.x1_breaks
    # x1 = e^{(z1+z2)/2}, x2 = e^{(z1-z2)/2}
    lo = max(2.0 * math.log(n) - z1, z1 - 2.0 * math.log(spec.M))
    hi = 2.0 * math.log(N) - z1
    if spec.is_zero or lo >= hi:
        return 0.0
    breaks = [z1 - 2.0 * math.log(b) for b in spec.x2_breaks]
    f = lambda z2: omega0_z(spec, np.full_like(z2, z1), z2)
    return rule.integrate(f, lo, hi, breaks)


def cross_section(spec: BumpSpec, z1: float, rule: QuadratureRule, rtol: float = 1e-9) -> CrossSection:
    """Cross-section ``I(z1) = 2 int omega0(x1, e^{z1}/x1) dx1 / x1``.

    Raises :class:`~hypersqg.quadrature.QuadratureError` if a panel refinement
    moves either side by more than ``rtol``.
    """
    x_side = checked(lambda r: _section_x(spec, z1, r), rule, rtol, 1e-300, "cross-section (x side)")
    z_side = checked(lambda r: _section_z(spec, z1, r), rule, rtol, 1e-300, "cross-section (z side)")
    return CrossSection(float(z1), x_side, z_side)


@dataclass(frozen=True)
class SectionFloor:
    Z1: float
    C: float
    limit: float
    samples_z1: tuple[float, ...]
    samples_I: tuple[float, ...]


def estimate_Z1_C(
    spec: BumpSpec,
    rule: QuadratureRule,
    step: float = 1.0 / 64.0,
    depth: float = 60.0,
    band: float = 0.01,
    floor: float = 1e-12,
) -> SectionFloor:
    """Threshold ``Z1`` and floor ``C`` with ``I(z1) >= C`` for all ``z1 <= Z1``.

    ``I`` is sampled on a descending ``z1`` ladder from the top of the support
    until it stops changing (relative change below 1e-10 over a unit of
    ``z1``).  ``Z1`` is the largest sample from which on every lower sample is
    within ``band`` of the limit; ``C`` is the smallest sample at or below it.
    """
    top = spec.box.z1_max
    window = max(2, int(round(1.0 / step)))
    zs: list[float] = []
    vals: list[float] = []
    k = 1
    while True:
        z1 = top - k * step
        zs.append(z1)
        vals.append(_section_x(spec, z1, rule))
        k += 1
        if len(vals) > window:
            recent = vals[-window:]
            ref = recent[-1]
            spread = max(recent) - min(recent)
            if ref > floor and spread <= 1e-10 * ref:
                break
        if k * step > depth:
            raise AxisDegenerateError(
                f"cross-section did not stabilize above {floor:g} within {depth} units below "
                f"z1 = {top:.4g} (last value {vals[-1]:.3e}); data vanishes on the x1-axis?"
            )
    limit = vals[-1]
    arr = np.asarray(vals)
    bad = np.nonzero(np.abs(arr - limit) > band * limit)[0]
    first = 0 if bad.size == 0 else int(bad[-1]) + 1
    Z1 = zs[first]
    C = float(arr[first:].min())
    return SectionFloor(Z1=Z1, C=C, limit=limit, samples_z1=tuple(zs), samples_I=tuple(vals))
