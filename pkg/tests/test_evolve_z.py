from __future__ import annotations

import math

import numpy as np
import pytest

from hypersqg import evolve_z
from hypersqg.biot_savart import omega_tilde
from hypersqg.evolve_z import (
    MonotonicityError, PicardDivergence, StepController, StepUnderflow, picard_solve, rhs, step_adaptive, step_rk4,
)
from hypersqg.profile import DisplacementProfile


def test_rhs_zero_field(rest, zero_spec, rule):
    assert not np.any(rhs(rest, zero_spec, 0.5, rule))


def test_rhs_shape_and_values(rest, spec, rule):
    v = rhs(rest, spec, 0.5, rule)
    nodes = rest.nodes
    assert np.all(v >= 0) and np.all(np.diff(v) <= 0)
    assert not np.any(v[nodes >= math.log(3.0)])
    assert v[0] == pytest.approx(2.0 * omega_tilde(float(nodes[0]), rest, spec, 0.5, rule), rel=1e-12)


def test_step_zero_field_unchanged(rest, zero_spec, rule):
    out = step_rk4(rest, 0.1, zero_spec, 0.5, rule)
    assert not np.any(out.values) and out.t == pytest.approx(0.1)


def test_constant_rhs_is_exact(monkeypatch, small_grid, spec, rule):
    c = 0.37
    monkeypatch.setattr(evolve_z, "rhs", lambda d, *a, **k: np.full(d.grid.count, c))
    d = DisplacementProfile.constant(small_grid, 0.25)
    out = step_rk4(d, 0.125, spec, 0.5, rule)
    np.testing.assert_array_equal(out.values, 0.25 + c * 0.125)


def test_local_error_order(small_grid, spec, rule):
    d0 = DisplacementProfile.zero(small_grid)
    errs = []
    for dt in (0.4, 0.2, 0.1):
        ref = d0
        for _ in range(16):
            ref = step_rk4(ref, dt / 16, spec, 0.5, rule)
        errs.append(np.max(np.abs(step_rk4(d0, dt, spec, 0.5, rule).values - ref.values)))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) >= 4.0


def test_one_small_step_matches_substeps(small_grid, spec, rule):
    d0 = DisplacementProfile.zero(small_grid)
    dt = 1e-3
    ref = d0
    for _ in range(16):
        ref = step_rk4(ref, dt / 16, spec, 0.5, rule)
    one = step_rk4(d0, dt, spec, 0.5, rule)
    assert np.max(np.abs(one.values - ref.values)) < 1e-3 * dt ** 4


def test_step_rejects_bad_dt(rest, spec, rule):
    with pytest.raises(ValueError):
        step_rk4(rest, 0.0, spec, 0.5, rule)


def test_monotonicity_guard():
    with pytest.raises(MonotonicityError):
        evolve_z._assert_monotone(np.array([0.0, 1.0]))
    with pytest.raises(MonotonicityError):
        evolve_z._assert_monotone(np.array([1.0, 0.5]), previous=np.array([2.0, 0.5]))
    evolve_z._assert_monotone(np.array([1.0, 1.0, 0.5]), previous=np.array([0.5, 0.5, 0.5]))


def test_adaptive_zero_field(rest, zero_spec, rule):
    res = step_adaptive(rest, StepController(), zero_spec, 0.5, rule)
    assert res.dt_used == StepController().dt_init
    assert not np.any(res.disp.values)


def test_adaptive_error_scales_like_dt5(small_grid, spec, rule):
    ctrl = StepController(atol=1.0, rtol=0.0, dt_max=1.0)
    d0 = DisplacementProfile.zero(small_grid)
    errs = [step_adaptive(d0, ctrl, spec, 0.5, rule, dt=dt).error for dt in (0.4, 0.2, 0.1)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) >= 4.5


def test_adaptive_underflow_is_clean(small_grid, spec, rule):
    ctrl = StepController(atol=1e-30, rtol=1e-30, dt_min=1e-3)
    with pytest.raises(StepUnderflow) as info:
        step_adaptive(DisplacementProfile.zero(small_grid), ctrl, spec, 0.5, rule, dt=0.01)
    assert info.value.dt < 1e-3


def test_controller_validation():
    with pytest.raises(ValueError):
        StepController(dt_init=0.0)
    with pytest.raises(ValueError):
        StepController(safety=1.5)
    h = StepController().halved()
    assert h.atol == 0.5e-8 and h.rtol == 0.5e-6


def test_picard_zero_field(small_grid, zero_spec, rule):
    res = picard_solve(0.1, small_grid, zero_spec, 0.5, rule, steps=4)
    assert res.iterations == 1
    assert not np.any(res.profiles[-1].values)


def _adaptive_to(T, grid, spec, rule):
    d, dt = DisplacementProfile.zero(grid), None
    ctrl = StepController()
    while d.t < T * (1 - 1e-14):
        res = step_adaptive(d, ctrl, spec, 0.5, rule, dt=min(dt or 1e-3, T - d.t))
        d, dt = res.disp, res.dt_next
    return d


def test_picard_matches_adaptive(small_grid, spec, rule):
    pic = picard_solve(0.1, small_grid, spec, 0.5, rule, steps=32)
    d = _adaptive_to(0.1, small_grid, spec, rule)
    assert np.max(np.abs(pic.profiles[-1].values - d.values)) < 1e-5


def test_picard_iterations_shrink_with_T(small_grid, spec, rule):
    its = [picard_solve(T, small_grid, spec, 0.5, rule, steps=8, tol=1e-13).iterations for T in (0.1, 0.05, 0.025)]
    assert its[0] >= its[1] >= its[2]
    assert its[0] > its[2]


def test_picard_divergence_detected(small_grid, spec, rule):
    # far past the singular time the fixed-point map cannot contract
    with pytest.raises((PicardDivergence, MonotonicityError, ValueError, FloatingPointError, OverflowError)):
        res = picard_solve(40.0, small_grid, spec, 0.5, rule, steps=4, max_iter=12)
        if res.updates[-1] > 1e-12:
            raise PicardDivergence("no convergence")


def test_grid_refinement_converges(spec, rule):
    from hypersqg.profile import Z1Grid
    T = 0.5
    top = math.log(3.0) + 1.0
    coarse = _adaptive_to(T, Z1Grid(-30.0, top, 129), spec, rule)
    mid = _adaptive_to(T, Z1Grid(-30.0, top, 257), spec, rule)
    fine = _adaptive_to(T, Z1Grid(-30.0, top, 513), spec, rule)
    # compare on the shared coarse nodes
    e1 = np.max(np.abs(coarse.values - fine.values[::4]))
    e2 = np.max(np.abs(mid.values[::2] - fine.values[::4]))
    assert e2 < e1
