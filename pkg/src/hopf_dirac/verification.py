"""The invariant suite behind ``hopf-dirac verify``.

Each check compares a measured quantity with its expected value and returns
a residual together with a tolerance.  ``sign_errors`` names checks whose
measured quantity is negated before the comparison; it exists so that the
harness itself can be tested (a flipped sign must be reported as a failure).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence

import numpy as np

from . import hopf_geometry as geo
from .aharonov_casher import build_zero_modes, kernel_subspace_angle, residual_check
from .dirac2d import spectrum_2d
from .fields import hopf_test_fields, ring_bump_profile, uniform_profile
from .oracles import s2_constant_field_oracle, s3_free_oracle
from .reports import CheckOutcome
from .spectrum3d import (assemble_spectrum, block_identity_check, k_window, kernel_dimension, lower_bound_check)
from .sphere_bundle import (FieldProfile, build_gauge, build_ring_gauge, chart_flux_check,
                            flux_and_constants, reduced_flux_density, stokes_flux,
                            transition_relation_residual)
from .transfer_r3 import (SphericalGrid, conformal_law_residual, constant_field_kernel,
                          modulus_profile_deviation, s3_kernel_residual, transfer_zero_mode)

CHERN_RANGE = tuple(range(-3, 4))


@dataclass(frozen=True)
class VerifyContext:
    seed: int = 0
    n_theta: int = 512
    sign_errors: FrozenSet[str] = field(default_factory=frozenset)

    def sign(self, name: str) -> float:
        return -1.0 if name in self.sign_errors else 1.0

    def points(self, count: int):
        return geo.random_points(count, self.seed)


CheckFunction = Callable[[VerifyContext], CheckOutcome]
REGISTRY: Dict[str, CheckFunction] = {}


def check(name: str):
    def register(func):
        REGISTRY[name] = func
        return func
    return register


def _max_gap(measured, expected) -> float:
    return float(np.max(np.abs(np.asarray(measured) - np.asarray(expected))))


@check("pauli_clifford")
def _pauli_clifford(ctx):
    s = ctx.sign("pauli_clifford")
    sig = [s * m for m in geo.PAULI.as_tuple()]
    worst = 0.0
    for i in range(3):
        for j in range(3):
            anti = sig[i] @ sig[j] + sig[j] @ sig[i]
            worst = max(worst, _max_gap(anti, 2.0 * (i == j) * np.eye(2)))
    prod = s * 1j * geo.SIGMA1 @ geo.SIGMA2 @ geo.SIGMA3
    worst = max(worst, _max_gap(prod, -np.eye(2)))
    return CheckOutcome("pauli_clifford", worst, 1e-14)


@check("frame_orthonormality")
def _frame_orthonormality(ctx):
    s = ctx.sign("frame_orthonormality")
    worst = 0.0
    for p in ctx.points(1000):
        fr = geo.frame_at(p)
        cols = np.column_stack([geo.pair_to_real(v) for v in (fr.u1, fr.u2, fr.n, p.as_pair())])
        worst = max(worst, _max_gap(s * cols.T @ cols, np.eye(4)))
        worst = max(worst, abs(s * geo.orientation_sign(p) - 1.0))
    return CheckOutcome("frame_orthonormality", worst, 1e-13)


@check("connection_table")
def _connection_table(ctx):
    s = ctx.sign("connection_table")
    worst = 0.0
    for p in ctx.points(1000):
        table = geo.connection_table(p)
        for key, expected in geo.EXPECTED_CONNECTION.items():
            worst = max(worst, _max_gap(s * table[key], expected))
    return CheckOutcome("connection_table", worst, 1e-13)


@check("fiber_form_identity")
def _fiber_form_identity(ctx):
    s = ctx.sign("fiber_form_identity")
    sample = ctx.points(1000)
    along = np.array([s * geo.dnu_value(p) for p in sample])
    worst = max(_max_gap(along, -2.0), geo.verify_dnu_identity(sample))
    return CheckOutcome("fiber_form_identity", worst, 1e-13)


@check("curvature_table")
def _curvature_table(ctx):
    s = ctx.sign("curvature_table")
    worst = 0.0
    for p in ctx.points(200):
        table = geo.riemann_curvature_table(p)
        for key, expected in geo.EXPECTED_CURVATURE.items():
            worst = max(worst, _max_gap(s * table[key], expected))
    return CheckOutcome("curvature_table", worst, 1e-12)


@check("hopf_pushforward")
def _hopf_pushforward(ctx):
    s = ctx.sign("hopf_pushforward")
    worst = 0.0
    for p in ctx.points(100):
        closed = geo.pushforward_closed_form(p)
        w = p.as_pair()
        for name in geo.FIELD_NAMES:
            fd = geo.pushforward_fd(p, geo.field_value(name, w))
            worst = max(worst, abs(s * fd - closed[name]) / max(1.0, abs(closed[name])))
    return CheckOutcome("hopf_pushforward", worst, 1e-8)


@check("bracket_pushforward")
def _bracket_pushforward(ctx):
    return CheckOutcome("bracket_pushforward", geo.bracket_pushforward_residual(ctx.points(100)), 1e-6)


@check("flux_constants")
def _flux_constants(ctx):
    s = ctx.sign("flux_constants")
    cases = {3.0: (1.5, 0.5, 1), 2.0: (1.0, 0.0, 1), -1.0: (-0.5, 0.5, -1), 0.0: (0.0, 0.0, 0)}
    worst = 0.0
    for g0, (total, c, m) in cases.items():
        fc = flux_and_constants(FieldProfile.constant(g0))
        worst = max(worst, abs(s * fc.total_flux - total), abs(s * fc.c - c), abs(s * fc.m - m))
    return CheckOutcome("flux_constants", worst, 1e-14)


def _gauges():
    for n in CHERN_RANGE:
        yield f"uniform n={n}", build_gauge(uniform_profile(n), n)
        yield f"ring n={n}", build_gauge(ring_bump_profile(n), n)


@check("chart_flux")
def _chart_flux(ctx):
    s = ctx.sign("chart_flux")
    worst = 0.0
    for _, gauge in _gauges():
        worst = max(worst, abs(s * chart_flux_check(gauge) - 2 * math.pi * gauge.n))
    for n in (-2, 3):
        gauge = build_ring_gauge(n, 0.9)
        worst = max(worst, abs(s * chart_flux_check(gauge) - 2 * math.pi * n))
    return CheckOutcome("chart_flux", worst, 1e-8)


@check("stokes_flux")
def _stokes_flux(ctx):
    s = ctx.sign("stokes_flux")
    worst = max(abs(s * stokes_flux(gauge) - 2 * math.pi * gauge.n) for _, gauge in _gauges())
    return CheckOutcome("stokes_flux", worst, 1e-6)


@check("chart_transition")
def _chart_transition(ctx):
    worst = max(transition_relation_residual(gauge) for _, gauge in _gauges())
    return CheckOutcome("chart_transition", worst, 1e-10)


@check("block_identities")
def _block_identities(ctx):
    worst = 0.0
    for g in hopf_test_fields().values():
        fc = flux_and_constants(g)
        for k in k_window(fc.c, 2.5):
            gauge = build_gauge(reduced_flux_density(g, k, fc), fc.m - k)
            tilde, plain = block_identity_check(k, gauge, fc.c, n_theta=32)
            worst = max(worst, tilde, plain)
    return CheckOutcome("block_identities", worst, 1e-12)


@check("zero_mode_counts")
def _zero_mode_counts(ctx):
    s = ctx.sign("zero_mode_counts")
    worst = 0.0
    for _, gauge in _gauges():
        spec = spectrum_2d(gauge, 1.0, ctx.n_theta)
        n = gauge.n
        worst = max(worst, abs(spec.zero_modes.count - abs(n)))
        if n != 0:
            worst = max(worst, abs(s * spec.zero_modes.spin - (1 if n > 0 else -1)))
    return CheckOutcome("zero_mode_counts", float(worst), 0.0)


@check("zero_mode_basis")
def _zero_mode_basis(ctx):
    worst = 0.0
    for n in (-2, 3):
        gauge = build_gauge(ring_bump_profile(n), n)
        basis = build_zero_modes(gauge)
        spec = spectrum_2d(gauge, 1.0, ctx.n_theta, want_kernel=True)
        worst = max(worst, kernel_subspace_angle(basis, spec), residual_check(basis, ctx.n_theta))
    return CheckOutcome("zero_mode_basis", worst, 1e-3)


@check("s3_free_oracle")
def _s3_free_oracle(ctx):
    s = ctx.sign("s3_free_oracle")
    energy = 2.5
    oracle = [(v, m) for v, m in s3_free_oracle(2).as_pairs() if abs(v) <= energy + 1e-9]
    report = assemble_spectrum(FieldProfile.constant(0.0), energy, ctx.n_theta, doublings=1)
    found = [(s * ml.value, ml.multiplicity) for ml in report.merged]
    found.sort()
    if [m for _, m in found] != [m for _, m in oracle]:
        return CheckOutcome("s3_free_oracle", math.inf, 1e-4, "multiplicities differ")
    return CheckOutcome("s3_free_oracle", _max_gap([v for v, _ in found], [v for v, _ in oracle]), 1e-4)


@check("s2_ritz_oracle")
def _s2_ritz_oracle(ctx):
    s = ctx.sign("s2_ritz_oracle")
    worst = 0.0
    for n in (0, 1, -2):
        oracle = s2_constant_field_oracle(n, basis_size=10, levels=3)
        top = oracle.positive[-1][0]
        spec = spectrum_2d(build_gauge(uniform_profile(n), n), top + 0.5, ctx.n_theta, doublings=1)
        found = spec.positive_spectrum()[:len(oracle.positive)]
        if [m for _, m in found] != [m for _, m in oracle.positive] or spec.zero_modes.count != oracle.zero_count:
            return CheckOutcome("s2_ritz_oracle", math.inf, 1e-3, f"multiplicities differ at n={n}")
        worst = max(worst, max(abs(s * a - b) / b for (a, _), (b, _) in zip(found, oracle.positive)))
    return CheckOutcome("s2_ritz_oracle", worst, 1e-3)


@check("kernel_dimension")
def _kernel_dimension(ctx):
    worst = 0
    for g0, expected in ((3.0, 1), (5.0, 2), (7.0, 3), (-5.0, 2), (0.0, 0)):
        dim = kernel_dimension(FieldProfile.constant(g0), n_theta=256)
        worst = max(worst, abs(dim - expected))
    return CheckOutcome("kernel_dimension", float(worst), 0.0)


@check("index_lower_bound")
def _index_lower_bound(ctx):
    failures = 0
    for g in hopf_test_fields().values():
        result = lower_bound_check(g, n_theta=256)
        failures += int(not result.passed)
    return CheckOutcome("index_lower_bound", float(failures), 0.0)


@check("s3_kernel_modes")
def _s3_kernel_modes(ctx):
    worst = max(s3_kernel_residual(xi, 5.0, seed=ctx.seed) for xi in constant_field_kernel(5.0))
    return CheckOutcome("s3_kernel_modes", worst, 1e-8)


@check("conformal_law")
def _conformal_law(ctx):
    def generic(z1, z2):
        return np.stack([z1 * np.conj(z2) + 0.3 * z2, np.conj(z1) ** 2 - 0.5j], axis=-1)

    return CheckOutcome("conformal_law", conformal_law_residual(generic, 3.0, seed=ctx.seed), 1e-6)


@check("r3_mode_profile")
def _r3_mode_profile(ctx):
    xi = constant_field_kernel(3.0)[0]
    grid = SphericalGrid.build(radius_max=1e3, radial=81, polar=6, azimuthal=8)
    sample = transfer_zero_mode(xi, grid, g=3.0)
    return CheckOutcome("r3_mode_profile", modulus_profile_deviation(sample), 1e-3)


def run_checks(ctx: Optional[VerifyContext] = None, names: Optional[Sequence[str]] = None) -> List[CheckOutcome]:
    """Run the registered checks (all by default) in registration order.

    A check that raises is reported as failed with the exception text.
    """
    ctx = VerifyContext() if ctx is None else ctx
    selected = list(REGISTRY) if names is None else list(names)
    unknown = [n for n in selected if n not in REGISTRY]
    if unknown:
        raise KeyError(f"unknown checks: {', '.join(unknown)}")
    outcomes = []
    for name in selected:
        try:
            outcomes.append(REGISTRY[name](ctx))
        except Exception as exc:  # reported, not swallowed: the check fails
            outcomes.append(CheckOutcome(name, math.inf, 0.0, f"{type(exc).__name__}: {exc}"))
    return outcomes
