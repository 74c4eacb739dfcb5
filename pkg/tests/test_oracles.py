import math

import numpy as np
import pytest

from hopf_dirac.errors import DegreeTooLarge
from hopf_dirac.oracles import (MomentTable, beta_moment_check, connection_term, moment_by_quadrature,
                                s2_closed_form, s2_constant_field_oracle, s3_closed_form, s3_free_oracle)


def test_degree_zero_is_the_connection_block():
    res = s3_free_oracle(0)
    np.testing.assert_allclose(connection_term(), -1.5 * np.eye(2))
    assert res.as_pairs() == [(-1.5, 2)]
    np.testing.assert_allclose(res.gram, 2 * math.pi ** 2 * np.eye(2), rtol=1e-15)


@pytest.mark.parametrize("degree", [1, 2, 3, 4])
def test_free_oracle_contains_lowest_pair_and_closes(degree):
    res = s3_free_oracle(degree)
    pairs = {round(v, 9): m for v, m in res.as_pairs()}
    assert pairs[1.5] == 2 and pairs[-1.5] == 2
    assert res.closure_residual <= 1e-12


def test_free_oracle_matches_closed_form():
    res = s3_free_oracle(4)
    found = [(round(v, 9), m) for v, m in res.as_pairs() if abs(v) <= 4.5 + 1e-9]
    assert found == [(round(v, 9), m) for v, m in s3_closed_form(4.5)]


def test_constant_field_oracle_kernel():
    res = s3_free_oracle(3, field_strength=3)
    pairs = {round(v, 9): m for v, m in res.as_pairs()}
    assert pairs[0.0] == 1 and pairs[-1.0] == 2


def test_degree_limit():
    with pytest.raises(DegreeTooLarge):
        s3_free_oracle(7)


@pytest.mark.parametrize("a, c", [(0, 0), (2, 3), (4, 1)])
def test_moments_two_routes(a, c):
    assert abs(MomentTable()[(a, c)] - moment_by_quadrature(a, c)) <= 1e-14


def test_beta_moment_identity():
    assert beta_moment_check(1.5, 2.5) <= 1e-12


def test_s2_oracle_zero_field_lowest_value():
    res = s2_constant_field_oracle(0, basis_size=30, levels=2)
    assert abs(res.positive[0][0] - 2.0) <= 1e-6
    assert res.zero_count == 0


def test_s2_oracle_unit_flux_zero_mode():
    res = s2_constant_field_oracle(1, basis_size=10, levels=3)
    assert res.zero_count == 1 and res.smallest_ritz <= 1e-8
    np.testing.assert_allclose([v for v, _ in res.positive], [v for v, _ in s2_closed_form(1, 3)], atol=1e-10)
    assert [m for _, m in res.positive] == [m for _, m in s2_closed_form(1, 3)]


def test_ritz_values_decrease_with_basis_size():
    sizes = (4, 6, 8)
    lows = [s2_constant_field_oracle(2, basis_size=s, levels=3).sector_ritz for s in sizes]
    for j in lows[0]:
        seq = [np.sort(np.abs(r[j]))[0] for r in lows if j in r]
        assert all(b <= a + 1e-12 for a, b in zip(seq, seq[1:]))


def test_s2_oracle_rejects_large_flux():
    with pytest.raises(ValueError):
        s2_constant_field_oracle(5)
