from __future__ import annotations

import numpy as np
import pytest

from hypersqg import kernels
from hypersqg.biot_savart import PROFILE_CODES
from hypersqg.quadrature import QuadratureRule

needs_ext = pytest.mark.skipif(not kernels.compiled_available(), reason="compiled extension not built")


def _args(n=400, seed=0, profile="plateau"):
    rng = np.random.default_rng(seed)
    y = np.sort(rng.uniform(-25.0, 1.2, n))
    shift = np.sort(rng.uniform(0.0, 3.0, n))[::-1]
    r = QuadratureRule()
    return (y, shift, 1.0, 2.0, 1.0, 1.0, PROFILE_CODES[profile], 0.5, r.reference_nodes, r.reference_weights,
            float(r.panels_per_unit))


@needs_ext
@pytest.mark.parametrize("profile", ["plateau", "lifted"])
def test_backends_agree(profile):
    from hypersqg import _kernels

    args = _args(profile=profile)
    a = _kernels.section_integrals(*args)
    b = kernels.python_section_integrals(*args)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-300)


@needs_ext
def test_worker_count_is_tolerance_deterministic():
    from hypersqg import _kernels

    args = _args(seed=3)
    one = _kernels.section_integrals(*args, 1)
    np.testing.assert_array_equal(one, _kernels.section_integrals(*args, 1))
    np.testing.assert_allclose(_kernels.section_integrals(*args, 4), one, rtol=1e-12, atol=0)


def test_python_backend_is_deterministic():
    args = _args(seed=5)
    np.testing.assert_array_equal(kernels.python_section_integrals(*args), kernels.python_section_integrals(*args))


def test_sections_vanish_above_support():
    args = list(_args())
    args[0] = np.array([1.2, 2.0, 5.0])
    args[1] = np.zeros(3)
    assert not np.any(kernels.section_integrals(*args))


def test_backend_name():
    assert kernels.BACKEND in ("compiled", "python")
