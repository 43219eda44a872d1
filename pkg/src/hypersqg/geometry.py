"""Coordinate changes between the quarter plane and log-hyperbolic coordinates.

``z1 = log(x1*x2)`` labels the hyperbola through a point and ``z2 = log(x1/x2)``
its position along it.  The flow moves particles along hyperbolas toward the
x2-axis, i.e. toward *decreasing* ``z2``.  Most of the reduced machinery is
therefore phrased in terms of the drift coordinate ``eta = -z2 = log(x2/x1)``,
in which particles move in the positive direction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# log of the largest finite double, with a little headroom
_EXP_LIMIT = 709.0


class DomainError(ValueError):
    """A point lies outside the domain of a coordinate transform."""


class TransformOverflow(OverflowError):
    pass


@dataclass(frozen=True)
class PointX:
    x1: float
    x2: float


@dataclass(frozen=True)
class PointZ:
    z1: float
    z2: float


@dataclass(frozen=True)
class SupportBox:
    """Bounding box ``[n, N] x [0, M]`` of the support of the initial data."""

    n: float
    N: float
    M: float

    def __post_init__(self) -> None:
        if not (0.0 < self.n <= self.N):
            raise ValueError(f"support box needs 0 < n <= N, got n={self.n}, N={self.N}")
        if not self.M > 0.0:
            raise ValueError(f"support box needs M > 0, got M={self.M}")

    @property
    def z1_max(self) -> float:
        """Largest hyperbola label meeting the box."""
        return math.log(self.N * self.M)


_ULPS = 8.0 * 2.0 ** -52


@dataclass(frozen=True)
class ZStrip:
    """Diagonal strip holding the z-image of a support box.

    Every image point satisfies ``z1 + lo <= eta <= z1 + hi`` with
    ``eta = -z2`` and ``z1 <= z1_max``.  The tests allow a few ulps of slack
    so that images of boundary points, which carry rounding from two
    logarithms, are never rejected.
    """

    z1_max: float
    lo: float
    hi: float

    def contains(self, q: PointZ) -> bool:
        eta = -q.z2
        slack = _ULPS * max(1.0, abs(q.z1), abs(q.z2), abs(self.lo), abs(self.hi), abs(self.z1_max))
        return (q.z1 <= self.z1_max + slack
                and q.z1 + self.lo - slack <= eta <= q.z1 + self.hi + slack)


def x_to_z(p: PointX) -> PointZ:
    if not (p.x1 > 0.0 and p.x2 > 0.0):
        raise DomainError(f"x_to_z needs x1 > 0 and x2 > 0, got ({p.x1}, {p.x2})")
    return PointZ(math.log(p.x1 * p.x2), math.log(p.x1 / p.x2))


def z_to_x(q: PointZ) -> PointX:
    e1 = 0.5 * (q.z1 + q.z2)
    e2 = 0.5 * (q.z1 - q.z2)
    if abs(e1) > _EXP_LIMIT or abs(e2) > _EXP_LIMIT:
        raise TransformOverflow(f"z_to_x({q.z1}, {q.z2}) leaves the double range")
    return PointX(math.exp(e1), math.exp(e2))


def x_to_z_array(x1, x2):
    """Vectorized :func:`x_to_z`; arrays must be strictly positive."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if np.any(x1 <= 0.0) or np.any(x2 <= 0.0):
        raise DomainError("x_to_z_array needs strictly positive coordinates")
    return np.log(x1 * x2), np.log(x1 / x2)


def z_to_x_array(z1, z2):
    z1 = np.asarray(z1, dtype=float)
    z2 = np.asarray(z2, dtype=float)
    e1 = 0.5 * (z1 + z2)
    e2 = 0.5 * (z1 - z2)
    if np.any(np.abs(e1) > _EXP_LIMIT) or np.any(np.abs(e2) > _EXP_LIMIT):
        raise TransformOverflow("z_to_x_array leaves the double range")
    return np.exp(e1), np.exp(e2)


def support_strip(box: SupportBox) -> ZStrip:
    return ZStrip(z1_max=box.z1_max, lo=-2.0 * math.log(box.N), hi=-2.0 * math.log(box.n))
