"""Composite Gauss-Legendre rules on panelized intervals."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


class QuadratureError(RuntimeError):
    """Successive refinements of a quadrature disagree beyond tolerance."""


@lru_cache(maxsize=None)
def _reference(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    # map [-1, 1] -> [0, 1]
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule of ``order`` points on panels no longer than ``1/panels_per_unit``.

    ``eps_tail`` is the relative level below which trailing outer-integral
    contributions are dropped.
    """

    order: int = 8
    panels_per_unit: float = 8.0
    eps_tail: float = 1e-14
    _ref: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError(f"quadrature order must be >= 1, got {self.order}")
        if not self.panels_per_unit > 0:
            raise ValueError(f"panels_per_unit must be positive, got {self.panels_per_unit}")
        if not 0.0 <= self.eps_tail < 1.0:
            raise ValueError(f"eps_tail must lie in [0, 1), got {self.eps_tail}")
        object.__setattr__(self, "_ref", _reference(self.order))

    @property
    def reference_nodes(self) -> np.ndarray:
        return self._ref[0]

    @property
    def reference_weights(self) -> np.ndarray:
        return self._ref[1]

    def refined(self) -> "QuadratureRule":
        """The same rule with panel width halved."""
        return QuadratureRule(self.order, 2.0 * self.panels_per_unit, self.eps_tail)

    def panel_count(self, length: float) -> int:
        return max(1, math.ceil(length * self.panels_per_unit - 1e-12))

    def panel_edges(self, breaks) -> np.ndarray:
        """Panel edges refining the sorted breakpoints ``breaks``."""
        breaks = np.unique(np.asarray(breaks, dtype=float))
        pieces = [breaks[:1]]
        for a, b in zip(breaks[:-1], breaks[1:]):
            k = self.panel_count(b - a)
            pieces.append(np.linspace(a, b, k + 1)[1:])
        return np.concatenate(pieces)

    def nodes_weights(self, edges) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights for one panel per consecutive pair of ``edges``."""
        edges = np.asarray(edges, dtype=float)
        h = np.diff(edges)
        t, w = self._ref
        nodes = edges[:-1, None] + h[:, None] * t[None, :]
        weights = h[:, None] * w[None, :]
        return nodes.ravel(), weights.ravel()

    def integrate(self, f, a: float, b: float, breaks=()) -> float:
        """Integrate a vectorized ``f`` over ``[a, b]``, splitting at interior ``breaks``."""
        if b <= a:
            return 0.0
        inner = [c for c in breaks if a < c < b]
        x, w = self.nodes_weights(self.panel_edges([a, *inner, b]))
        return float(np.dot(w, f(x)))


def checked(compute, rule: QuadratureRule, rtol: float = 1e-9, atol: float = 1e-300, what: str = "integral"):
    """Evaluate ``compute(rule)`` and ``compute(rule.refined())``; raise if they differ.

    Returns the refined value.
    """
    coarse = compute(rule)
    fine = compute(rule.refined())
    if abs(fine - coarse) > rtol * abs(fine) + atol:
        raise QuadratureError(
            f"{what}: refinement changed the value from {coarse!r} to {fine!r} "
            f"(relative change {abs(fine - coarse) / max(abs(fine), 1e-300):.3e} > {rtol:g})"
        )
    return fine
