from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from hypersqg.geometry import PointX, PointZ, x_to_z, z_to_x_array
from hypersqg.initial_data import (
    AxisDegenerateError, BumpSpec, cross_section, estimate_Z1_C, eval_omega0_x, eval_omega0_z, grad_omega0_x,
    grad_omega0_z, omega0_x, omega0_z,
)
from hypersqg.quadrature import QuadratureRule


def reference_omega0(x1, x2, A=1.0, c1=2.0, r1=1.0, M=1.0):
    # direct transcription of the profile formulas
    s = (x1 - c1) / r1
    if abs(s) > 1 or not 0 <= x2 <= M:
        return 0.0
    phi = math.cos(math.pi * s / 2) ** 2
    t = x2 / M
    psi = 1.0 if t <= 0.5 else math.cos(math.pi * (2 * t - 1) / 2) ** 2
    return A * phi * psi


def test_peak_and_outside(spec):
    assert eval_omega0_x(spec, PointX(2.0, 0.0)) == 1.0
    assert eval_omega0_x(spec, PointX(4.0, 0.5)) == 0.0
    assert eval_omega0_x(spec, PointX(2.0, 1.0 + 1e-12)) == 0.0


def test_interior_value_matches_formula(spec):
    # (2, 0.3) sits on the plateau, so the value is the peak
    assert eval_omega0_x(spec, PointX(2.0, 0.3)) == pytest.approx(1.0, abs=1e-14)
    v = eval_omega0_x(spec, PointX(2.3, 0.7))
    assert 0.0 < v < 1.0
    assert v == pytest.approx(reference_omega0(2.3, 0.7), abs=1e-14)


@given(st.floats(0.5, 3.5), st.floats(0.0, 1.2))
def test_matches_formula_everywhere(x1, x2):
    assert eval_omega0_x(BumpSpec(), PointX(x1, x2)) == pytest.approx(reference_omega0(x1, x2), abs=1e-14)


@given(st.floats(0.5, 3.5), st.floats(-1.0, 2.0))
def test_nonnegative_and_bounded(x1, x2):
    v = float(omega0_x(BumpSpec(A=2.5), np.array(x1), np.array(x2)))
    assert 0.0 <= v <= 2.5


def test_z_evaluation_is_composition(spec):
    rng = np.random.default_rng(3)
    z1 = rng.uniform(-6, 2, 10_000)
    z2 = rng.uniform(-6, 6, 10_000)
    x1, x2 = z_to_x_array(z1, z2)
    np.testing.assert_allclose(omega0_z(spec, z1, z2), omega0_x(spec, x1, x2), atol=1e-14, rtol=0)
    q = x_to_z(PointX(2.0, 0.3))
    assert eval_omega0_z(spec, q) == pytest.approx(eval_omega0_x(spec, PointX(2.0, 0.3)), abs=1e-15)
    assert eval_omega0_z(spec, PointZ(10.0, 40.0)) == 0.0


def test_z_gradient_matches_finite_differences(spec):
    h = 1e-5
    for x1, x2 in [(2.0, 0.3), (1.6, 0.7), (2.5, 0.6), (2.2, 0.05)]:
        q = x_to_z(PointX(x1, x2))
        g1, g2 = grad_omega0_z(spec, q)
        f = lambda a, b: eval_omega0_z(spec, PointZ(a, b))
        fd1 = (f(q.z1 + h, q.z2) - f(q.z1 - h, q.z2)) / (2 * h)
        fd2 = (f(q.z1, q.z2 + h) - f(q.z1, q.z2 - h)) / (2 * h)
        assert abs(g1 - fd1) < 1e-7 and abs(g2 - fd2) < 1e-7
    assert grad_omega0_z(spec, PointZ(10.0, 40.0)) == (0.0, 0.0)


def test_mirror_symmetry_of_z_gradient(spec):
    # omega0 is even in x1 about c1; the x-gradient reflects, the z-gradient follows by chain rule
    for d, x2 in [(0.3, 0.2), (0.6, 0.7)]:
        a1, a2 = grad_omega0_x(spec, np.array(2.0 + d), np.array(x2))
        b1, b2 = grad_omega0_x(spec, np.array(2.0 - d), np.array(x2))
        assert float(a1) == pytest.approx(-float(b1), abs=1e-14)
        assert float(a2) == pytest.approx(float(b2), abs=1e-14)
        ga = grad_omega0_z(spec, x_to_z(PointX(2.0 + d, x2)))
        gb = grad_omega0_z(spec, x_to_z(PointX(2.0 - d, x2)))
        xa, xb = 2.0 + d, 2.0 - d
        # g1 + g2 = x1 d1, g1 - g2 = x2 d2
        assert (ga[0] + ga[1]) / xa == pytest.approx(-(gb[0] + gb[1]) / xb, abs=1e-13)
        assert (ga[0] - ga[1]) == pytest.approx(gb[0] - gb[1], abs=1e-13)


def test_c1_at_support_edges(spec):
    h = 1e-7
    f = lambda x1, x2: float(omega0_x(spec, np.array(x1), np.array(x2)))
    for x1, x2, axis in [(1.0, 0.3, 0), (3.0, 0.3, 0), (2.0, 1.0, 1), (2.0, 0.5, 1)]:
        if axis == 0:
            left = (f(x1, x2) - f(x1 - h, x2)) / h
            right = (f(x1 + h, x2) - f(x1, x2)) / h
        else:
            left = (f(x1, x2) - f(x1, x2 - h)) / h
            right = (f(x1, x2 + h) - f(x1, x2)) / h
        assert abs(left - right) < 1e-6


def test_invalid_specs_rejected():
    with pytest.raises(ValueError):
        BumpSpec(c1=1.0, r1=1.0)
    with pytest.raises(ValueError):
        BumpSpec(M=0.0)
    with pytest.raises(ValueError):
        BumpSpec(profile="box")


def test_cross_section_trivial_cases(spec, zero_spec, rule):
    assert cross_section(spec, math.log(3.0) + 0.1, rule).value == 0.0
    assert cross_section(zero_spec, -1.0, rule).value == 0.0


@pytest.mark.parametrize("z1", list(np.linspace(-15.0, 1.05, 20)))
def test_cross_section_sides_agree(spec, rule, z1):
    cs = cross_section(spec, float(z1), rule)
    assert cs.value == pytest.approx(cs.z_side, rel=1e-8, abs=1e-300)


def test_cross_section_against_scipy(spec, rule):
    z1 = -1.0
    a = math.exp(z1)
    val, _ = integrate.quad(lambda x1: 2.0 * reference_omega0(x1, a / x1) / x1, 1.0, 3.0,
                            points=[a / 0.5, a / 1.0], epsabs=1e-14, epsrel=1e-13, limit=200)
    assert cross_section(spec, z1, rule).value == pytest.approx(val, rel=1e-10)


def test_estimate_Z1_C_standard(spec, rule):
    f = estimate_Z1_C(spec, rule)
    limit, _ = integrate.quad(lambda x1: 2.0 * reference_omega0(x1, 0.0) / x1, 1.0, 3.0, epsabs=1e-14)
    assert f.C > 0
    assert f.Z1 < math.log(3.0)
    assert abs(f.C - limit) <= 0.01 * limit
    fine = estimate_Z1_C(spec, rule.refined())
    assert abs(fine.C - f.C) < 1e-8


def test_estimate_Z1_C_rejects_axis_degenerate(rule):
    with pytest.raises(AxisDegenerateError):
        estimate_Z1_C(BumpSpec(profile="lifted"), rule)
