import numpy as np
import pytest

from hopf_dirac.aharonov_casher import (build_zero_modes, decay_exponent, kernel_subspace_angle,
                                        residual_check, spin_purity, transition_residuals)
from hopf_dirac.dirac2d import spectrum_2d
from hopf_dirac.fields import ring_bump_profile, uniform_profile
from hopf_dirac.sphere_bundle import build_gauge, build_ring_gauge


@pytest.mark.parametrize("gauge_of", [lambda n: build_gauge(uniform_profile(n), n),
                                      lambda n: build_gauge(ring_bump_profile(n), n)])
@pytest.mark.parametrize("n", [-3, -1, 1, 3])
def test_basis_size_spin_and_conditioning(gauge_of, n):
    basis = build_zero_modes(gauge_of(n))
    assert len(basis) == abs(n)
    assert basis.spin == (1 if n > 0 else -1)
    assert spin_purity(basis) == 0.0
    assert basis.condition_number < 1e10
    assert abs(np.linalg.det(basis.gram)) > 0
    assert max(transition_residuals(basis)) <= 1e-12


def test_empty_basis_for_trivial_bundle():
    basis = build_zero_modes(build_gauge(uniform_profile(0), 0))
    assert basis.is_empty and len(basis) == 0


def test_unit_flux_mode_decays_like_inverse_radius():
    basis = build_zero_modes(build_gauge(uniform_profile(1), 1))
    assert abs(decay_exponent(basis) + 1.0) <= 1e-3


def test_ring_gauge_residual_is_tiny():
    basis = build_zero_modes(build_ring_gauge(-2, 1.3))
    assert residual_check(basis, 4096, stencil="fitted") <= 1e-8


def test_residual_second_order_on_smooth_field():
    basis = build_zero_modes(build_gauge(ring_bump_profile(2), 2))
    coarse, fine = residual_check(basis, 512), residual_check(basis, 1024)
    assert 3.0 <= coarse / fine <= 5.0


def test_constant_monomial_residual_is_quadrature_limited():
    basis = build_zero_modes(build_gauge(uniform_profile(1), 1))
    assert residual_check(basis, 1024) <= 1e-6


@pytest.mark.parametrize("n", [-2, 3])
def test_explicit_basis_spans_solver_kernel(n):
    gauge = build_gauge(ring_bump_profile(n), n)
    basis = build_zero_modes(gauge)
    coarse = kernel_subspace_angle(basis, spectrum_2d(gauge, 1.0, 256, want_kernel=True))
    fine = kernel_subspace_angle(basis, spectrum_2d(gauge, 1.0, 1024, want_kernel=True))
    assert fine <= 1e-3
    assert fine <= coarse
