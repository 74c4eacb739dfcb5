import math

import numpy as np
import pytest

from hopf_dirac.dirac2d import (merge_values, reduce_axisymmetric, sector_layout, solve_sector, spectrum_2d,
                                window_cutoff)
from hopf_dirac.errors import GridTooCoarse
from hopf_dirac.fields import ring_bump_profile, uniform_profile
from hopf_dirac.sphere_bundle import build_gauge, build_ring_gauge


def constant_field_levels(n, energy_max):
    return [(2 * math.sqrt(p * (p + abs(n))), abs(n) + 2 * p) for p in range(1, 50)
            if 2 * math.sqrt(p * (p + abs(n))) <= energy_max]


def lowest_positive(gauge, j, n_theta, stencil="regular"):
    return solve_sector(reduce_axisymmetric(gauge, j, n_theta, stencil), window=(0.0, 10.0)).eigenvalues[0]


@pytest.mark.parametrize("stencil", ["regular", "dirichlet", "fitted"])
@pytest.mark.parametrize("n", [-2, 0, 3])
def test_sector_matrix_is_hermitian(stencil, n):
    gauge = build_gauge(ring_bump_profile(n), n)
    for j in (-3, -1, 0, 2):
        assert reduce_axisymmetric(gauge, j, 32, stencil).hermiticity_residual() <= 1e-12


def test_zero_field_lowest_value_converges_to_two():
    gauge = build_gauge(uniform_profile(0), 0)
    errors = [abs(lowest_positive(gauge, 0, n) - 2.0) for n in (128, 256, 512)]
    assert errors[-1] <= 2e-5
    assert 3.5 <= errors[0] / errors[1] <= 4.5
    assert 3.5 <= errors[1] / errors[2] <= 4.5


@pytest.mark.parametrize("stencil", ["regular", "dirichlet"])
def test_second_order_convergence_perturbed(stencil):
    gauge = build_gauge(ring_bump_profile(1), 1)
    ref = lowest_positive(gauge, 0, 8192, stencil)
    e1, e2, e3 = (abs(lowest_positive(gauge, 0, n, stencil) - ref) for n in (128, 256, 512))
    assert 3.0 <= e1 / e2 <= 4.6 and 3.0 <= e2 / e3 <= 4.6


def test_dense_sanity_path():
    sol = solve_sector(np.diag([2.0, -1.0]))
    np.testing.assert_allclose(sol.eigenvalues, [-1.0, 2.0])


def test_zero_field_sector_symmetric():
    gauge = build_gauge(uniform_profile(0), 0)
    for j in (-2, 0, 1):
        vals = solve_sector(reduce_axisymmetric(gauge, j, 64)).eigenvalues
        np.testing.assert_allclose(np.sort(vals), np.sort(-vals), atol=1e-10)


@pytest.mark.parametrize("n, count, spin", [(0, 0, 0), (2, 2, 1), (-2, 2, -1), (3, 3, 1)])
def test_zero_mode_counts(n, count, spin):
    spec = spectrum_2d(build_gauge(uniform_profile(n), n), 1.0, 256)
    assert spec.zero_modes.count == count
    assert spec.zero_modes.spin == spin
    assert spec.zero_modes.index == n


@pytest.mark.parametrize("n", [-3, -1, 0, 1, 2])
def test_constant_field_spectrum(n):
    spec = spectrum_2d(build_gauge(uniform_profile(n), n), 8.0, 512, doublings=1)
    found = spec.positive_spectrum()
    expected = constant_field_levels(n, 8.0)
    assert [m for _, m in found] == [m for _, m in expected]
    np.testing.assert_allclose([v for v, _ in found], [v for v, _ in expected], atol=1e-6)
    assert spec.symmetry_defect() <= 1e-8


def test_stencils_agree_on_perturbed_field():
    gauge = build_gauge(ring_bump_profile(-1), -1)
    a = spectrum_2d(gauge, 4.0, 1024, doublings=1, stencil="regular")
    b = spectrum_2d(gauge, 4.0, 1024, doublings=1, stencil="dirichlet")
    assert [m for _, m in a.positive_spectrum()] == [m for _, m in b.positive_spectrum()]
    np.testing.assert_allclose([v for v, _ in a.positive_spectrum()], [v for v, _ in b.positive_spectrum()],
                               atol=1e-6)


def test_backends_agree():
    gauge = build_gauge(ring_bump_profile(2), 2)
    a = spectrum_2d(gauge, 4.0, 64, backend="lapack")
    b = spectrum_2d(gauge, 4.0, 64, backend="native")
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, atol=1e-10)


def test_ring_gauge_with_fitted_stencil():
    spec = spectrum_2d(build_ring_gauge(2, 0.9), 1.0, 512, stencil="fitted")
    assert spec.zero_modes.count == 2 and spec.zero_modes.spin == 1


def test_grid_layout_and_guards():
    theta, upper, width = sector_layout(0, 1, 16)
    assert theta.size == 2 * 16 - 1 and upper[0] and upper[-1]
    theta, upper, _ = sector_layout(2, 1, 16)
    assert theta.size == 32 and upper[0] and not upper[-1]
    with pytest.raises(GridTooCoarse):
        reduce_axisymmetric(build_gauge(uniform_profile(0), 0), 0, 8)
    with pytest.raises(ValueError):
        reduce_axisymmetric(build_gauge(uniform_profile(0), 0), 0, 32, "spectral")


def test_merge_and_window_helpers():
    values, mults = merge_values([1.0, 1.0 + 1e-9, 2.0, -1.0])
    np.testing.assert_allclose(values, [-1.0, 1.0, 2.0], atol=1e-8)
    assert list(mults) == [1, 2, 1]
    assert window_cutoff(2.0) > 2.0
