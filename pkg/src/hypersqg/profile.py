"""Reduced state: the displacement profile on a uniform z1 grid."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Z1Grid:
    """Uniform grid of hyperbola labels ``z1`` on ``[z1_min, z1_max]``."""

    z1_min: float
    z1_max: float
    count: int

    def __post_init__(self) -> None:
        if not self.z1_min < self.z1_max:
            raise ValueError(f"grid needs z1_min < z1_max, got {self.z1_min} >= {self.z1_max}")
        if self.count < 4:
            raise ValueError(f"grid needs at least 4 nodes, got {self.count}")

    @property
    def spacing(self) -> float:
        return (self.z1_max - self.z1_min) / (self.count - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.z1_min, self.z1_max, self.count)

    def refined(self) -> "Z1Grid":
        return Z1Grid(self.z1_min, self.z1_max, 2 * self.count - 1)

    def to_dict(self) -> dict:
        return {"z1_min": self.z1_min, "z1_max": self.z1_max, "count": self.count}


def _cubic_weights(u: np.ndarray) -> np.ndarray:
    """Lagrange weights for stencil offsets -1, 0, 1, 2 at fractional position ``u``."""
    return np.stack(
        [
            -u * (u - 1.0) * (u - 2.0) / 6.0,
            (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
            -(u + 1.0) * u * (u - 2.0) / 2.0,
            (u + 1.0) * u * (u - 1.0) / 6.0,
        ]
    )


def interp_uniform(values: np.ndarray, x0: float, h: float, x) -> np.ndarray:
    """Four-point Lagrange interpolation of nodal ``values`` on a uniform grid.

    Points outside the grid take the nearest end value.
    """
    values = np.asarray(values, dtype=float)
    x = np.asarray(x, dtype=float)
    n = values.size
    pos = (x - x0) / h
    base = np.clip(np.floor(pos).astype(np.int64), 1, n - 3)
    u = pos - base
    w = _cubic_weights(u)
    out = (
        w[0] * values[base - 1]
        + w[1] * values[base]
        + w[2] * values[base + 1]
        + w[3] * values[base + 2]
    )
    out = np.where(pos <= 0.0, values[0], out)
    out = np.where(pos >= n - 1, values[-1], out)
    return out


@dataclass
class DisplacementProfile:
    """Accumulated drift ``X(z1, t)`` of every hyperbola line.

    The full solution is the initial data shifted along each line:
    ``omega~(z1, z2, t) = omega~0(z1, z2 + X(z1, t))`` (particles move toward
    decreasing ``z2``).
    """

    grid: Z1Grid
    values: np.ndarray
    t: float = 0.0
    _nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.count,):
            raise ValueError(f"profile has shape {self.values.shape}, grid has {self.grid.count} nodes")
        self._nodes = self.grid.nodes

    @classmethod
    def zero(cls, grid: Z1Grid, t: float = 0.0) -> "DisplacementProfile":
        return cls(grid, np.zeros(grid.count), t)

    @classmethod
    def constant(cls, grid: Z1Grid, c: float, t: float = 0.0) -> "DisplacementProfile":
        return cls(grid, np.full(grid.count, float(c)), t)

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.values == self.values[0]))

    def at(self, z1) -> np.ndarray:
        return interp_uniform(self.values, self.grid.z1_min, self.grid.spacing, z1)

    def slope_nodes(self) -> np.ndarray:
        """Central differences of the profile (one-sided at the ends)."""
        return np.gradient(self.values, self.grid.spacing)

    def slope_at(self, z1) -> np.ndarray:
        return interp_uniform(self.slope_nodes(), self.grid.z1_min, self.grid.spacing, z1)

    def copy(self) -> "DisplacementProfile":
        return DisplacementProfile(self.grid, self.values.copy(), self.t)
