import math
import warnings

import numpy as np
import pytest

from hopf_dirac.dirac2d import reduce_axisymmetric
from hopf_dirac.errors import HypothesisViolation, MergeCollision
from hopf_dirac.fields import hopf_test_fields
from hopf_dirac.spectrum3d import (SpectralLine, SpectrumReport, assemble_spectrum, block_apply,
                                   block_identity_check, k_window, kernel_closed_form, kernel_dimension,
                                   lift_eigenvectors, lower_bound_check, merge_lines, s_line)
from hopf_dirac.sphere_bundle import FieldProfile, build_gauge, flux_and_constants, reduced_flux_density
from hopf_dirac.dirac2d import solve_sector


@pytest.mark.parametrize("c, energy, expected", [(0.5, 2.0, [-3, -2, -1, 0, 1, 2]), (0.0, 0.4, [0]),
                                                 (0.5, 0.0, [-1, 0])])
def test_k_window(c, energy, expected):
    assert k_window(c, energy) == expected


def test_constant_g3_lines():
    report = assemble_spectrum(FieldProfile.constant(3.0), 2.0, 256)
    assert report.kernel_dim == 1
    zero = [ml for ml in report.merged if ml.value == 0.0][0]
    assert zero.multiplicity == 1 and zero.origins[0].kind == "S" and zero.origins[0].k == 0
    assert report.multiplicity_at(-1.0) >= 2
    assert s_line(1, report.constants) is None


def test_free_field_lowest_lines():
    report = assemble_spectrum(FieldProfile.constant(0.0), 1.6, 256, doublings=1)
    assert [(round(ml.value, 6), ml.multiplicity) for ml in report.merged] == [(-1.5, 2), (1.5, 2)]
    minus = [ml for ml in report.merged if ml.value < 0][0]
    assert sorted(o.k for o in minus.origins) == [-1, 1]
    plus = [ml for ml in report.merged if ml.value > 0][0]
    assert [(o.k, o.kind, o.multiplicity) for o in plus.origins] == [(0, "branch", 2)]
    assert abs(plus.origins[0].lam - 2.0) <= 1e-6


@pytest.mark.parametrize("m, expected", [(1, 1), (0, 0), (-3, 2), (-1, 0), (4, 4)])
def test_kernel_closed_form(m, expected):
    assert kernel_closed_form(m) == expected


@pytest.mark.parametrize("g0, expected", [(3.0, 1), (1.0, 0), (-5.0, 2), (5.0, 2)])
def test_kernel_dimension_cross_checked(g0, expected):
    assert kernel_dimension(FieldProfile.constant(g0), n_theta=128) == expected


def test_kernel_dimension_closed_form_needs_half_c():
    with pytest.raises(HypothesisViolation):
        kernel_dimension(FieldProfile.constant(2.0), require_closed_form=True)
    assert kernel_dimension(FieldProfile.constant(2.0), n_theta=128) == 0


def test_lift_degenerate_and_values():
    gauge = build_gauge(FieldProfile.constant(0.0), 0)
    op = reduce_axisymmetric(gauge, 0, 128)
    sol = solve_sector(op, window=(0.0, 3.0), want_vectors=True)
    xi, lam = sol.vectors[:, 0], sol.eigenvalues[0]
    pair = lift_eigenvectors(xi, lam, 0, 0.0, op)
    np.testing.assert_allclose(pair.plus, xi)
    np.testing.assert_allclose(pair.minus, op.spin * xi)
    assert abs(pair.value_plus - (lam - 0.5)) < 1e-15 and abs(pair.value_minus + lam + 0.5) < 1e-15
    lifted = lift_eigenvectors(xi, lam, 0, 0.5, op)
    root = math.sqrt(lam ** 2 + 0.25)
    assert abs(lifted.value_plus - (root - 0.5)) < 1e-14
    assert lifted.residual_plus <= 1e-10 and lifted.residual_minus <= 1e-10
    rayleigh = lifted.plus @ block_apply(op, 0, 0.5, lifted.plus) / (lifted.plus @ lifted.plus)
    assert abs(rayleigh - lifted.value_plus) <= 1e-10


def test_lift_needs_positive_eigenvalue():
    op = reduce_axisymmetric(build_gauge(FieldProfile.constant(0.0), 0), 0, 16)
    with pytest.raises(ValueError):
        lift_eigenvectors(np.ones(op.size), 0.0, 0, 0.5, op)


@pytest.mark.parametrize("name", sorted(hopf_test_fields()))
def test_block_identities(name):
    g = hopf_test_fields()[name]
    fc = flux_and_constants(g)
    for k in k_window(fc.c, 3.0):
        gauge = build_gauge(reduced_flux_density(g, k, fc), fc.m - k)
        tilde, plain = block_identity_check(k, gauge, fc.c, n_theta=32)
        assert tilde <= 1e-12 and plain <= 1e-12


def test_order_independence():
    g = hopf_test_fields()["ring_g3"]
    ks = k_window(flux_and_constants(g).c, 2.5)
    a = assemble_spectrum(g, 2.5, 128)
    b = assemble_spectrum(g, 2.5, 128, k_order=ks[::-1], threads=1)
    assert a == b


def test_lower_bound_examples():
    for g0, dim in ((3.0, 1), (0.0, 0), (5.0, 2)):
        res = lower_bound_check(FieldProfile.constant(g0), n_theta=128)
        assert res.passed and res.equality and res.kernel_dim == dim


def test_merge_flags_near_misses():
    lines = [SpectralLine(1.0, 1, 0, "S", spin=1), SpectralLine(1.0 + 5e-6, 2, 1, "branch", lam=1.0, branch=1)]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        merged, near = merge_lines(lines)
    assert len(merged) == 2 and len(near) == 1
    assert any(issubclass(w.category, MergeCollision) for w in caught)
    exact = [SpectralLine(-1.0, 2, -1, "S", spin=1), SpectralLine(-1.0 + 1e-9, 1, 0, "branch", lam=1.0, branch=-1)]
    merged, near = merge_lines(exact)
    assert len(merged) == 1 and merged[0].mixed and merged[0].value == -1.0 and merged[0].multiplicity == 3


def test_report_dict_round_trip():
    report = assemble_spectrum(FieldProfile.constant(3.0), 1.0, 64)
    assert SpectrumReport.from_dict(report.to_dict()) == report


def test_line_reconstruction():
    report = assemble_spectrum(hopf_test_fields()["ring_g3"], 2.0, 256)
    fc = report.constants
    for line in report.lines:
        assert abs(line.reconstruct(fc.c, fc.m) - line.value) <= 1e-12
