import math

import numpy as np
import pytest

from hopf_dirac import hopf_geometry as geo
from hopf_dirac.hopf_geometry import PointS3

NORTH = PointS3(1 + 0j, 0j)
DIAGONAL = PointS3(complex(1 / math.sqrt(2)), complex(1 / math.sqrt(2)))


def test_hopf_projection_examples():
    assert geo.hopf_project(NORTH) == geo.POINT_AT_INFINITY
    assert geo.hopf_project(PointS3(0j, 1 + 0j)) == 0
    assert abs(geo.hopf_project(DIAGONAL) - 2.0) < 1e-15


def test_frame_at_north_pole():
    fr = geo.frame_at(NORTH)
    np.testing.assert_allclose(fr.u1, [0, -1j], atol=0)
    np.testing.assert_allclose(fr.u2, [0, -1], atol=0)
    np.testing.assert_allclose(fr.n, [1j, 0], atol=0)


def test_frame_orthonormal_and_tangent():
    for p in [DIAGONAL] + geo.random_points(50, seed=3):
        fr = geo.frame_at(p)
        np.testing.assert_allclose(fr.gram(), np.eye(3), atol=1e-15)
        for name in geo.FIELD_NAMES:
            assert abs(geo.real_inner(fr[name], p.as_pair())) < 1e-15
        assert geo.orientation_sign(p) == 1.0


def test_pauli_algebra():
    assert geo.PAULI.anticommutator_residual() == 0.0
    assert geo.PAULI.orientation_residual() == 0.0


@pytest.mark.parametrize("p", [NORTH, DIAGONAL] + geo.random_points(5, seed=11))
def test_connection_examples(p):
    fr = geo.frame_at(p)
    np.testing.assert_allclose(geo.embedded_covariant_derivative("n", "u1", p), fr.u2, atol=1e-15)
    np.testing.assert_allclose(geo.embedded_covariant_derivative("n", "n", p), 0, atol=1e-15)
    np.testing.assert_allclose(geo.embedded_covariant_derivative("u1", "u2", p), fr.n, atol=1e-15)


def test_connection_table_on_random_points():
    assert geo.connection_table_residual(geo.random_points(1000, seed=0)) <= 1e-13


def test_fiber_form_identity():
    assert geo.verify_dnu_identity(geo.random_points(200, seed=2)) <= 1e-13
    assert geo.dnu_value(NORTH) == -2.0
    assert geo.verify_dnu_identity([DIAGONAL, DIAGONAL]) == geo.verify_dnu_identity([DIAGONAL])
    with pytest.raises(ValueError):
        geo.verify_dnu_identity([])


def test_curvature_table():
    for p in geo.random_points(20, seed=4):
        table = geo.riemann_curvature_table(p)
        np.testing.assert_allclose(table[("u1", "n")], [1, 0, 0], atol=1e-13)
        np.testing.assert_allclose(table[("u2", "u1")], [0, 0, 0], atol=1e-13)
        np.testing.assert_allclose(table[("u1", "u1")], [0, 0, -1], atol=1e-13)
        for key, expected in geo.EXPECTED_CURVATURE.items():
            np.testing.assert_allclose(table[key], expected, atol=1e-13)


def test_pushforward_matches_finite_differences():
    for p in geo.random_points(30, seed=6):
        closed = geo.pushforward_closed_form(p)
        for name in geo.FIELD_NAMES:
            fd = geo.pushforward_fd(p, geo.field_value(name, p.as_pair()))
            assert abs(fd - closed[name]) <= 1e-8 * max(1.0, abs(closed[name]))


def test_vertical_bracket_projects_to_zero():
    assert geo.bracket_pushforward_residual(geo.random_points(30, seed=7)) <= 1e-6


def test_spin_connection_is_antihermitian():
    for p in geo.random_points(10, seed=8):
        for mat in geo.spin_connection_matrices(p).values():
            np.testing.assert_allclose(mat + mat.conj().T, 0, atol=1e-15)


def test_normalization_guard():
    with pytest.raises(ValueError):
        PointS3.normalized(0, 0)
    assert PointS3.normalized(3, 4j).norm_residual() < 1e-15
