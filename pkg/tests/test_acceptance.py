"""End-to-end acceptance criteria; each test prints one PASS/FAIL line."""

import math
import time
import warnings

import pytest

from hopf_dirac import hopf_geometry as geo
from hopf_dirac.aharonov_casher import build_zero_modes, kernel_subspace_angle
from hopf_dirac.dirac2d import spectrum_2d
from hopf_dirac.errors import MergeCollision
from hopf_dirac.fields import hopf_test_fields, ring_bump_profile, uniform_profile
from hopf_dirac.oracles import s3_free_oracle
from hopf_dirac.spectrum3d import (assemble_spectrum, block_identity_check, k_window, lower_bound_check)
from hopf_dirac.sphere_bundle import (FieldProfile, build_gauge, build_ring_gauge, chart_flux_check,
                                      flux_and_constants, reduced_flux_density)
from hopf_dirac.transfer_r3 import (SphericalGrid, constant_field_kernel, modulus_profile_deviation,
                                    norm_stability, r3_dirac_residual, transfer_zero_mode)

N_THETA = 2048


@pytest.fixture
def verdict(capsys):
    """Print a single PASS/FAIL line for a criterion, then assert it."""
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, f"criterion {number} failed: {detail}"
    return emit


def test_criterion_1_kernel_dimensions(verdict):
    results, worst = {}, 0.0
    ok = True
    for g0, expected in ((3.0, 1), (5.0, 2), (7.0, 3)):
        start = time.perf_counter()
        report = assemble_spectrum(FieldProfile.constant(g0), 1.0, N_THETA)
        elapsed = time.perf_counter() - start
        worst = max(worst, elapsed)
        zero = [ml for ml in report.merged if ml.value == 0.0]
        carried = len(zero) == 1 and [(o.kind, o.k) for o in zero[0].origins] == [("S", 0)]
        results[g0] = report.kernel_dim
        ok = ok and report.kernel_dim == expected and carried and elapsed <= 60.0
    verdict(1, ok, f"kernel dims {results}, slowest {worst:.2f}s")


def test_criterion_2_minus_one_multiplicity(verdict):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = assemble_spectrum(FieldProfile.constant(3.0), 2.0, N_THETA)
    line = [ml for ml in report.merged if abs(ml.value + 1.0) <= 1e-6]
    assert len(line) == 1
    origins = line[0].origins
    from_s = sum(o.multiplicity for o in origins if o.kind == "S" and o.k == -1)
    branch_at = [o for o in origins if o.kind == "branch"]
    near = [w for w in caught if issubclass(w.category, MergeCollision)]
    flagged = (not branch_at) or (-1.0 in report.settings["mixed_origin_values"])
    ok = line[0].multiplicity >= 2 and from_s >= 2 and flagged
    verdict(2, ok, f"-1 multiplicity {line[0].multiplicity} (S_-1 gives {from_s}), branch origins "
                   f"{len(branch_at)}, near-miss warnings {len(near)}")


def test_criterion_3_free_spectrum(verdict):
    start = time.perf_counter()
    report = assemble_spectrum(FieldProfile.constant(0.0), 4.5, N_THETA, doublings=1)
    elapsed = time.perf_counter() - start
    oracle = [(v, m) for v, m in s3_free_oracle(4).as_pairs() if abs(v) <= 4.5 + 1e-9]
    closed = sorted((s * (1.5 + j), (j + 1) * (j + 2)) for j in range(4) for s in (-1, 1))
    found = [(ml.value, ml.multiplicity) for ml in report.merged]

    def gap_to(reference):
        if [m for _, m in found] != [m for _, m in reference]:
            return math.inf
        return max(abs(a - b) for (a, _), (b, _) in zip(found, reference))

    oracle_gap, closed_gap = gap_to(oracle), gap_to(closed)
    ok = oracle_gap <= 1e-4 and closed_gap <= 1e-4 and elapsed <= 300.0
    verdict(3, ok, f"{len(found)} lines, gap to oracle {oracle_gap:.2e}, to closed form {closed_gap:.2e}, "
                   f"{elapsed:.1f}s")


def test_criterion_4_aharonov_casher(verdict):
    worst_angle, bad = 0.0, []
    for n in range(-3, 4):
        gauges = {"uniform": build_gauge(uniform_profile(n), n), "ring": build_gauge(ring_bump_profile(n), n)}
        for label, gauge in gauges.items():
            spec = spectrum_2d(gauge, 1.0, N_THETA, want_kernel=True)
            expected_spin = (n > 0) - (n < 0)
            if spec.zero_modes.count != abs(n) or (n != 0 and spec.zero_modes.spin != expected_spin):
                bad.append((label, n))
                continue
            if n != 0:
                worst_angle = max(worst_angle, kernel_subspace_angle(build_zero_modes(gauge), spec))
    ok = not bad and worst_angle <= 1e-3
    verdict(4, ok, f"count/spin failures {bad}, max subspace angle {worst_angle:.2e}")


def test_criterion_5_exact_algebra(verdict):
    start = time.perf_counter()
    worst_block = 0.0
    for g in hopf_test_fields().values():
        fc = flux_and_constants(g)
        for k in k_window(fc.c, 4.5):
            gauge = build_gauge(reduced_flux_density(g, k, fc), fc.m - k)
            worst_block = max(worst_block, *block_identity_check(k, gauge, fc.c, n_theta=64))
    points = geo.random_points(1000, seed=5)
    table = geo.connection_table_residual(points)
    dnu = geo.verify_dnu_identity(points)
    elapsed = time.perf_counter() - start
    ok = worst_block <= 1e-12 and table <= 1e-13 and dnu <= 1e-13 and elapsed <= 30.0
    verdict(5, ok, f"block {worst_block:.1e}, connection table {table:.1e}, (nu,*dnu) {dnu:.1e}, {elapsed:.1f}s")


def test_criterion_6_flux_quantization(verdict):
    worst, count = 0.0, 0
    gauges = []
    for n in range(-3, 4):
        gauges += [build_gauge(uniform_profile(n), n), build_gauge(ring_bump_profile(n), n),
                   build_ring_gauge(n, 0.8)]
    for g in hopf_test_fields().values():
        fc = flux_and_constants(g)
        gauges += [build_gauge(reduced_flux_density(g, k, fc), fc.m - k) for k in k_window(fc.c, 3.0)]
    for gauge in gauges:
        worst = max(worst, abs(chart_flux_check(gauge) - 2 * math.pi * gauge.n))
        count += 1
    verdict(6, worst <= 1e-8, f"{count} gauges, max |flux - 2 pi n| {worst:.1e}")


def test_criterion_7_index_lower_bound(verdict):
    rows = {}
    for name, g in hopf_test_fields().items():
        res = lower_bound_check(g, n_theta=N_THETA)
        rows[name] = (res.kernel_dim, res.flux_bound, res.passed, res.equality)
    ok = all(passed and equal for _, _, passed, equal in rows.values())
    verdict(7, ok, f"(dim, bound, holds, equality) {rows}")


def test_criterion_8_transferred_mode(verdict):
    start = time.perf_counter()
    xi = constant_field_kernel(3.0)[0]
    sample = transfer_zero_mode(xi, SphericalGrid.build(radius_max=1e3), g=3.0)
    deviation = modulus_profile_deviation(sample)
    stability, _ = norm_stability(sample, (1e2, 1e3))
    residual = r3_dirac_residual(xi, 3.0)
    elapsed = time.perf_counter() - start
    ok = deviation <= 1e-3 and stability <= 1e-3 and residual <= 1e-4 and elapsed <= 120.0
    verdict(8, ok, f"profile deviation {deviation:.1e}, norm stability {stability:.1e}, "
                   f"Dirac residual {residual:.1e}, {elapsed:.1f}s")
