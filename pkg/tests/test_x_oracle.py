from __future__ import annotations

import numpy as np
import pytest

from hypersqg.biot_savart import InitialField, omega_x
from hypersqg.initial_data import BumpSpec
from hypersqg.profile import DisplacementProfile
from hypersqg.x_oracle import (
    ParticleCloud, ProductDrift, compare_with_z, evolve, oracle_omega, oracle_step, product_drift,
)


@pytest.fixture(scope="module")
def cloud128(spec):
    return ParticleCloud.lattice(spec, 128)


def test_empty_cloud(zero_spec):
    c = ParticleCloud.lattice(zero_spec, 16)
    assert oracle_omega(0.1, c, 0.5) == 0.0
    out = oracle_step(c, 0.1, 0.5)
    np.testing.assert_array_equal(out.x1, c.x1)
    np.testing.assert_array_equal(out.x2, c.x2)


def test_above_all_products(cloud128):
    assert oracle_omega(float(cloud128.products.max()) * 1.01, cloud128, 0.5) == 0.0


def test_matches_quadrature_at_t0(cloud128, rule):
    ref = omega_x(0.1, InitialField(BumpSpec()), 0.5, rule)
    assert oracle_omega(0.1, cloud128, 0.5) == pytest.approx(ref, rel=5e-4)


def test_vectorised_queries(cloud128):
    a = np.array([0.05, 0.1, 1.0])
    np.testing.assert_array_equal(oracle_omega(a, cloud128, 0.5), [oracle_omega(float(v), cloud128, 0.5) for v in a])


def test_products_conserved_and_monotone_drift(spec):
    c = ParticleCloud.lattice(spec, 48)
    out = evolve(c, 0.1, 0.5, dt_max=1e-3)
    assert product_drift(out) < 1e-8
    assert np.all(out.x1 <= c.x1) and np.all(out.x2 >= c.x2)
    np.testing.assert_array_equal(out.weight, c.weight)


def test_product_error_shrinks_with_dt(spec):
    c = ParticleCloud.lattice(spec, 32)
    errs = [product_drift(oracle_step(c, dt, 0.5)) for dt in (0.4, 0.2, 0.1, 0.05)]
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    assert np.all(orders >= 4.5)


def test_drift_guard(spec):
    with pytest.raises(ProductDrift):
        oracle_step(ParticleCloud.lattice(spec, 16), 50.0, 0.5, drift_tol=1e-6)


def test_compare_trivial(spec, zero_spec, rest):
    assert compare_with_z(ParticleCloud.lattice(spec, 32), rest) == 0.0
    z = evolve(ParticleCloud.lattice(zero_spec, 16), 0.05, 0.5)
    assert compare_with_z(z, DisplacementProfile(rest.grid, rest.values, 0.05)) == 0.0
