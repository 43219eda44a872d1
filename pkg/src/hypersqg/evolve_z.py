"""Time evolution of the displacement profile.

Each line ``z1`` drifts along itself at speed ``2 Omega~(z1, t)``; the state is
just the accumulated drift ``X(z1, t)``.  Two independent integrators are
provided: explicit RK4 with step-doubling control, and Picard iteration on
the integral form ``X(z1, t) = 2 int_0^t Omega~(z1, s) ds``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .biot_savart import check_alpha, omega_tilde_grid
from .initial_data import BumpSpec
from .profile import DisplacementProfile, Z1Grid
from .quadrature import QuadratureRule

MONOTONE_TOL = 1e-9


class MonotonicityError(RuntimeError):
    """The profile lost monotonicity in z1 or in t: the quadrature is under-resolved."""


class StepUnderflow(RuntimeError):
    """The adaptive step fell below ``dt_min``; expected near blow-up."""

    def __init__(self, message: str, disp: DisplacementProfile, dt: float):
        super().__init__(message)
        self.disp = disp
        self.dt = dt


class PicardDivergence(RuntimeError):
    pass


@dataclass(frozen=True)
class StepController:
    dt_init: float = 1e-3
    safety: float = 0.9
    atol: float = 1e-8
    rtol: float = 1e-6
    dt_min: float = 1e-10
    dt_max: float = 0.25
    grow_max: float = 5.0
    shrink_min: float = 0.2

    def __post_init__(self) -> None:
        if not 0.0 < self.dt_min <= self.dt_init <= self.dt_max:
            raise ValueError("controller needs 0 < dt_min <= dt_init <= dt_max")
        if not 0.0 < self.safety < 1.0:
            raise ValueError(f"safety factor must lie in (0, 1), got {self.safety}")
        if not (self.atol >= 0.0 and self.rtol >= 0.0 and self.atol + self.rtol > 0.0):
            raise ValueError("tolerances must be nonnegative and not both zero")

    def halved(self) -> "StepController":
        return StepController(self.dt_init, self.safety, self.atol / 2, self.rtol / 2, self.dt_min,
                              self.dt_max, self.grow_max, self.shrink_min)


def rhs(disp: DisplacementProfile, spec: BumpSpec, alpha: float, rule: QuadratureRule, workers: int = 1) -> np.ndarray:
    """Drift speed ``2 Omega~`` at every grid node."""
    return 2.0 * omega_tilde_grid(disp, spec, alpha, rule, workers)


def _assert_monotone(values: np.ndarray, previous: np.ndarray | None = None) -> None:
    scale = max(1.0, float(np.max(np.abs(values))))
    tol = MONOTONE_TOL * scale
    rise = np.diff(values)
    if np.any(rise > tol):
        i = int(np.argmax(rise))
        raise MonotonicityError(
            f"profile increases in z1 by {rise[i]:.3e} between nodes {i} and {i + 1} (tolerance {tol:.1e})"
        )
    if np.any(values < -tol):
        raise MonotonicityError(f"profile went negative: min {values.min():.3e}")
    if previous is not None and np.any(values < previous - tol):
        i = int(np.argmax(previous - values))
        raise MonotonicityError(f"profile decreased in time at node {i} by {previous[i] - values[i]:.3e}")


def _rk4(disp, dt, spec, alpha, rule, workers, k1=None):
    x0 = disp.values
    grid = disp.grid
    f = lambda x: rhs(DisplacementProfile(grid, x), spec, alpha, rule, workers)
    if k1 is None:
        k1 = f(x0)
    k2 = f(x0 + 0.5 * dt * k1)
    k3 = f(x0 + 0.5 * dt * k2)
    k4 = f(x0 + dt * k3)
    return x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_rk4(disp: DisplacementProfile, dt: float, spec: BumpSpec, alpha: float, rule: QuadratureRule,
             workers: int = 1) -> DisplacementProfile:
    """One classical RK4 step of ``dX/dt = 2 Omega~``."""
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    alpha = check_alpha(alpha)
    new = _rk4(disp, dt, spec, alpha, rule, workers)
    _assert_monotone(new, disp.values)
    return DisplacementProfile(disp.grid, new, disp.t + dt)


@dataclass
class StepResult:
    disp: DisplacementProfile
    dt_used: float
    dt_next: float
    error: float
    rejected: int = 0


def step_adaptive(disp: DisplacementProfile, ctrl: StepController, spec: BumpSpec, alpha: float,
                  rule: QuadratureRule, dt: float | None = None, workers: int = 1) -> StepResult:
    """Advance by one accepted step under step-doubling error control.

    The error of a full step is estimated from two half steps,
    ``|X_half - X_full| / 15``, and compared with ``atol + rtol |X|``.
    Raises :class:`StepUnderflow` once the trial step would drop below
    ``ctrl.dt_min``.
    """
    alpha = check_alpha(alpha)
    dt = ctrl.dt_init if dt is None else min(dt, ctrl.dt_max)
    grid = disp.grid
    x0 = disp.values
    k1 = rhs(disp, spec, alpha, rule, workers)
    rejected = 0
    while True:
        if dt < ctrl.dt_min:
            raise StepUnderflow(f"step size {dt:.3e} fell below dt_min = {ctrl.dt_min:.1e} at t = {disp.t:.12g}",
                                disp, dt)
        full = _rk4(disp, dt, spec, alpha, rule, workers, k1)
        half = _rk4(disp, 0.5 * dt, spec, alpha, rule, workers, k1)
        mid = DisplacementProfile(grid, half)
        fine = _rk4(mid, 0.5 * dt, spec, alpha, rule, workers)
        scale = ctrl.atol + ctrl.rtol * np.maximum(np.abs(fine), np.abs(x0))
        err = float(np.max(np.abs(fine - full) / 15.0 / scale)) if fine.size else 0.0
        if not math.isfinite(err):
            err = math.inf
        if err <= 1.0:
            _assert_monotone(fine, x0)
            if err == 0.0:
                factor = ctrl.grow_max
            else:
                factor = min(ctrl.grow_max, max(ctrl.shrink_min, ctrl.safety * err ** -0.2))
            dt_next = min(ctrl.dt_max, dt * factor)
            return StepResult(DisplacementProfile(grid, fine, disp.t + dt), dt, dt_next, err, rejected)
        rejected += 1
        dt *= max(ctrl.shrink_min, ctrl.safety * err ** -0.2) if math.isfinite(err) else ctrl.shrink_min


@dataclass
class PicardResult:
    times: np.ndarray
    profiles: list[DisplacementProfile]
    iterations: int
    updates: list[float] = field(default_factory=list)

    def at(self, t: float) -> DisplacementProfile:
        j = int(np.argmin(np.abs(self.times - t)))
        return self.profiles[j]


def picard_solve(T: float, grid: Z1Grid, spec: BumpSpec, alpha: float, rule: QuadratureRule,
                 max_iter: int = 50, tol: float = 1e-12, steps: int = 64, workers: int = 1) -> PicardResult:
    """Fixed point of ``X(t) = 2 int_0^t Omega~[X(s)] ds`` on a uniform time mesh.

    Starts from ``X = 0`` and integrates in time with the trapezoid rule.
    Stops once the sup-norm update drops below ``tol``; raises
    :class:`PicardDivergence` if the update grows three times in a row.
    """
    alpha = check_alpha(alpha)
    if not T > 0.0:
        raise ValueError(f"T must be positive, got {T}")
    times = np.linspace(0.0, T, steps + 1)
    dts = np.diff(times)
    X = np.zeros((steps + 1, grid.count))
    updates: list[float] = []
    growth = 0
    for it in range(1, max_iter + 1):
        speed = np.stack([rhs(DisplacementProfile(grid, X[j], times[j]), spec, alpha, rule, workers)
                          for j in range(steps + 1)])
        new = np.zeros_like(X)
        new[1:] = np.cumsum(0.5 * dts[:, None] * (speed[1:] + speed[:-1]), axis=0)
        upd = float(np.max(np.abs(new - X)))
        X = new
        if updates and upd > updates[-1]:
            growth += 1
            if growth >= 3:
                raise PicardDivergence(f"Picard update grew three times in a row (last {upd:.3e}); T too long?")
        else:
            growth = 0
        updates.append(upd)
        if upd < tol:
            break
    profiles = [DisplacementProfile(grid, X[j], float(times[j])) for j in range(steps + 1)]
    return PicardResult(times, profiles, it, updates)
