"""Independent check of the z-reduction: particles in the original x-coordinates.

The support box is covered by a ``K x K`` lattice of material cells.  Because
the flow is incompressible, each cell keeps its area, so at any time

    Omega(a) = sum over particles with X1 X2 >= a of omega0(label) dA / |X|^(2+alpha).

Sorting particles by ``X1 X2`` and taking suffix sums gives ``Omega`` at every
particle in ``O(K^2 log K)``.  Nothing here touches the quadrature or the
z-side solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .initial_data import BumpSpec, omega0_x
from .profile import DisplacementProfile


class ProductDrift(RuntimeError):
    """A particle left its hyperbola: ``x1 x2`` changed beyond tolerance."""


@dataclass
class ParticleCloud:
    x1_0: np.ndarray
    x2_0: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    weight: np.ndarray  # omega0(label) * cell area
    t: float = 0.0

    @classmethod
    def lattice(cls, spec: BumpSpec, K: int) -> "ParticleCloud":
        box = spec.box
        h1 = (box.N - box.n) / K
        h2 = box.M / K
        c1 = box.n + h1 * (np.arange(K) + 0.5)
        c2 = h2 * (np.arange(K) + 0.5)
        X1, X2 = np.meshgrid(c1, c2, indexing="ij")
        X1, X2 = X1.ravel(), X2.ravel()
        w = omega0_x(spec, X1, X2) * (h1 * h2)
        return cls(X1, X2, X1.copy(), X2.copy(), w, 0.0)

    @property
    def products(self) -> np.ndarray:
        return self.x1 * self.x2

    @property
    def initial_products(self) -> np.ndarray:
        return self.x1_0 * self.x2_0

    def copy(self) -> "ParticleCloud":
        return ParticleCloud(self.x1_0, self.x2_0, self.x1.copy(), self.x2.copy(), self.weight, self.t)


def _table(x1, x2, weight, alpha):
    prod = x1 * x2
    order = np.argsort(prod, kind="stable")
    contrib = weight[order] / (x1[order] ** 2 + x2[order] ** 2) ** (1.0 + 0.5 * alpha)
    suffix = np.append(np.cumsum(contrib[::-1])[::-1], 0.0)
    return prod[order], suffix


def _omega_from_table(table, a):
    prod, suffix = table
    return suffix[np.searchsorted(prod, a, side="left")]


def oracle_omega(a, cloud: ParticleCloud, alpha: float):
    """Particle-sum ``Omega`` on the hyperbola(s) ``x1 x2 = a``."""
    scalar = np.ndim(a) == 0
    out = _omega_from_table(_table(cloud.x1, cloud.x2, cloud.weight, alpha), np.atleast_1d(np.asarray(a, float)))
    return float(out[0]) if scalar else out


def _hyperbola_groups(x1, x2):
    """Sort order by ``x1 x2`` and, per particle, the start of its tie group."""
    prod = x1 * x2
    order = np.argsort(prod, kind="stable")
    first = np.searchsorted(prod[order], prod, side="left")
    return order, first


def _velocity(x1, x2, weight, alpha, groups):
    # groups fixed at the start of the step: Omega is then smooth across the RK
    # stages instead of jumping when a stage perturbation reorders near-ties
    order, first = groups
    contrib = weight[order] / (x1[order] ** 2 + x2[order] ** 2) ** (1.0 + 0.5 * alpha)
    suffix = np.append(np.cumsum(contrib[::-1])[::-1], 0.0)
    om = suffix[first]
    return -x1 * om, x2 * om


def oracle_step(cloud: ParticleCloud, dt: float, alpha: float, drift_tol: float = 1e-6) -> ParticleCloud:
    """One RK4 step of every particle.

    The hyperbola ordering is read from the positions at the start of the
    step; every stage re-evaluates the kernel weights at its own positions.
    Stage one therefore equals :func:`oracle_omega` on the current cloud.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    x1, x2, w = cloud.x1, cloud.x2, cloud.weight
    groups = _hyperbola_groups(x1, x2)
    a1, b1 = _velocity(x1, x2, w, alpha, groups)
    a2, b2 = _velocity(x1 + 0.5 * dt * a1, x2 + 0.5 * dt * b1, w, alpha, groups)
    a3, b3 = _velocity(x1 + 0.5 * dt * a2, x2 + 0.5 * dt * b2, w, alpha, groups)
    a4, b4 = _velocity(x1 + dt * a3, x2 + dt * b3, w, alpha, groups)
    n1 = x1 + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    n2 = x2 + (dt / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
    p0 = cloud.initial_products
    drift = float(np.max(np.abs(n1 * n2 - p0) / p0))
    if drift > drift_tol:
        raise ProductDrift(f"particle product drifted by {drift:.3e} (> {drift_tol:g}) at t = {cloud.t + dt:.6g}")
    return ParticleCloud(cloud.x1_0, cloud.x2_0, n1, n2, w, cloud.t + dt)


def evolve(cloud: ParticleCloud, t_end: float, alpha: float, dt_max: float = 1e-3) -> ParticleCloud:
    steps = max(1, math.ceil(t_end / dt_max - 1e-9))
    dt = t_end / steps
    for _ in range(steps):
        cloud = oracle_step(cloud, dt, alpha)
    return cloud


def product_drift(cloud: ParticleCloud) -> float:
    p0 = cloud.initial_products
    return float(np.max(np.abs(cloud.products - p0) / p0))


def compare_with_z(cloud: ParticleCloud, disp: DisplacementProfile) -> float:
    """Sup-norm gap between particle drift along hyperbolas and the profile.

    A particle's drift is the change in ``log(x2/x1)``; the reduction predicts
    ``X`` at the particle's (conserved) line ``z1 = log(x1_0 x2_0)``.
    """
    drift = np.log(cloud.x2 / cloud.x1) - np.log(cloud.x2_0 / cloud.x1_0)
    z1 = np.log(cloud.initial_products)
    return float(np.max(np.abs(drift - disp.at(z1))))
