import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from peririchards.chebyshev import make_grid
from peririchards.kernel import (
    RegularizedKernelWarning,
    beta_closed_form,
    beta_quadrature,
    compute_beta,
    evaluate_phi,
    evaluate_phibar,
    grid_floor,
    make_kernel,
    sample_kernel,
)

# integral of (x - 1 + d) / (d x) over [1 - d, 1], doubled; frozen from an independent scipy quad run
FROZEN_BETA = {
    0.05: 0.05085481327307974,
    0.15: 0.15811879902521778,
    0.3: 0.3355169282859155,
    0.5: 0.6137056388801094,
}


@pytest.mark.parametrize("delta", sorted(FROZEN_BETA))
def test_distributed_beta_frozen(delta):
    assert beta_closed_form("distributed", delta) == pytest.approx(FROZEN_BETA[delta], abs=1e-12)
    assert abs(beta_quadrature("distributed", delta) - FROZEN_BETA[delta]) <= 1e-8


def test_beta_at_015():
    assert compute_beta("distributed", 0.15) == pytest.approx(0.158119, abs=5e-7)


@given(st.floats(0.01, 0.95))
def test_distributed_closed_form_matches_quadrature(delta):
    assert abs(beta_closed_form("distributed", delta) - beta_quadrature("distributed", delta)) <= 1e-8


@given(st.sampled_from(["uniform", "linear"]), st.floats(0.02, 0.9), st.floats(1e-4, 0.99))
def test_regularized_closed_forms(family, delta, floor):
    closed = beta_closed_form(family, delta, floor)
    quad = beta_quadrature(family, delta, floor)
    assert abs(closed - quad) <= 1e-8 * max(1.0, abs(closed))


def test_regularized_family_warns():
    with pytest.warns(RegularizedKernelWarning):
        compute_beta("uniform", 0.15, 0.01)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        compute_beta("distributed", 0.15)


def test_shapes_of_families():
    z = np.array([-0.2, 0.0, 0.1, 0.15, 0.5, 0.9, 1.5])
    np.testing.assert_allclose(evaluate_phi("uniform", 0.15, z), [0, 2 / 0.15, 2 / 0.15, 2 / 0.15, 0, 0, 0])
    np.testing.assert_allclose(evaluate_phi("linear", 0.2, z), [0, 1, 0.5, 0.25, 0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(evaluate_phi("distributed", 0.2, z), [0, 0, 0, 0, 0, 0.5, 3.5], atol=1e-15)


def test_phi_is_even():
    z = np.linspace(0, 2, 41)
    for fam in ("uniform", "linear", "distributed"):
        np.testing.assert_array_equal(evaluate_phi(fam, 0.3, z), evaluate_phi(fam, 0.3, -z))


def test_phibar_needs_floor():
    with pytest.raises(ValueError, match="z_floor"):
        evaluate_phibar("linear", 0.2, 0.0)
    assert evaluate_phibar("distributed", 0.2, 0.0) == 0.0
    assert evaluate_phibar("uniform", 0.2, 0.0, 0.05) == pytest.approx(10 / 0.05)


def test_invalid_family_and_delta():
    with pytest.raises(ValueError, match="family"):
        evaluate_phi("gaussian", 0.1, 0.0)
    for bad in (0.0, 1.0, -0.1, np.nan):
        with pytest.raises(ValueError, match="delta"):
            evaluate_phi("uniform", bad, 0.0)


def test_grid_floor_skips_centre():
    assert grid_floor(make_grid(4)) == pytest.approx(np.sqrt(0.5))
    assert grid_floor(make_grid(5)) == pytest.approx(np.cos(2 * np.pi / 5))


def test_kernel_spec():
    g = make_grid(200)
    spec = make_kernel("distributed", 0.15, g)
    assert not spec.regularized and spec.z_floor is None
    assert spec.beta == pytest.approx(FROZEN_BETA[0.15], abs=1e-12)
    np.testing.assert_array_equal(sample_kernel(spec, g), spec.nodal_values)
    uni = make_kernel("uniform", 0.15, g)
    assert uni.regularized and uni.z_floor == pytest.approx(np.sin(np.pi / 200))
    assert uni.beta == pytest.approx(uni.beta_quad, rel=1e-8)
    assert np.all(np.isfinite(uni.nodal_values))
