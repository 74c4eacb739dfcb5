"""Spectrum of the magnetic Dirac operator on S^3 assembled from 2-D blocks.

For a field h *nu with flux constants (c, m) the operator splits into blocks
indexed by the fibre momentum k + c (k integer).  Block k carries the 2-D
operator with Chern number m - k and contributes

* branch lines  +-sqrt(lambda^2 + (k+c)^2) - 1/2 for each positive 2-D
  eigenvalue lambda, with the 2-D multiplicity;
* the S_k line  sgn(m-k)(k+c) - 1/2 with multiplicity |m-k| from the 2-D
  zero modes (absent when m = k).
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dirac2d import (MERGE_TOL, SectorOperator, reduce_axisymmetric, spectrum_2d, window_cutoff)
from .errors import HypothesisViolation, MergeCollision, NumericalError
from .sphere_bundle import (FieldProfile, FluxConstants, GaugeData, build_gauge, flux_and_constants,
                            reduced_flux_density)

THREADS_ENV = "HOPF_DIRAC_THREADS"


@dataclass(frozen=True)
class SpectralLine:
    """One eigenvalue contribution with its provenance.

    ``kind`` is "branch" (with ``lam`` and ``branch`` = +-1) or "S" (with
    ``spin`` = sgn(m - k)).
    """

    value: float
    multiplicity: int
    k: int
    kind: str
    lam: Optional[float] = None
    branch: Optional[int] = None
    spin: Optional[int] = None

    def reconstruct(self, c: float, m: int) -> float:
        """Value recomputed from the origin formula."""
        if self.kind == "S":
            return float(np.sign(m - self.k)) * (self.k + c) - 0.5
        return self.branch * math.sqrt(self.lam ** 2 + (self.k + c) ** 2) - 0.5

    def sort_key(self):
        return (self.value, self.k, self.kind, self.branch or 0, self.lam or 0.0)

    def to_dict(self) -> dict:
        return {"value": self.value, "multiplicity": self.multiplicity, "k": self.k, "kind": self.kind,
                "lambda": self.lam, "branch": self.branch, "spin": self.spin}

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralLine":
        return cls(value=d["value"], multiplicity=d["multiplicity"], k=d["k"], kind=d["kind"],
                   lam=d.get("lambda"), branch=d.get("branch"), spin=d.get("spin"))


@dataclass(frozen=True)
class MergedLine:
    value: float
    multiplicity: int
    origins: Tuple[SpectralLine, ...]

    @property
    def mixed(self) -> bool:
        return len({o.kind for o in self.origins}) > 1


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    field: FieldProfile
    constants: FluxConstants
    window: float
    lines: Tuple[SpectralLine, ...]
    merged: Tuple[MergedLine, ...]
    kernel_dim: int
    per_k_diagnostics: Dict[int, dict]
    settings: dict = field(default_factory=dict)

    def multiplicity_at(self, value: float, tol: float = MERGE_TOL) -> int:
        return sum(line.multiplicity for line in self.merged
                   if abs(line.value - value) <= tol * max(1.0, abs(value)))

    def to_dict(self) -> dict:
        return {
            "field": self.field.to_dict(),
            "constants": self.constants.to_dict(),
            "energy_max": self.window,
            "kernel_dim": self.kernel_dim,
            "lines": [line.to_dict() for line in self.lines],
            "merged": [{"value": ml.value, "multiplicity": ml.multiplicity} for ml in self.merged],
            "diagnostics": {str(k): v for k, v in self.per_k_diagnostics.items()},
            "settings": dict(self.settings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectrumReport":
        lines = tuple(SpectralLine.from_dict(x) for x in d["lines"])
        constants = FluxConstants(**d["constants"])
        merged = merge_lines(lines, warn=False)[0]
        return cls(field=FieldProfile.from_dict(d["field"]), constants=constants, window=d["energy_max"],
                   lines=lines, merged=merged, kernel_dim=d["kernel_dim"],
                   per_k_diagnostics={int(k): v for k, v in d["diagnostics"].items()},
                   settings=dict(d.get("settings", {})))

    def __eq__(self, other):
        if not isinstance(other, SpectrumReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def k_window(c: float, energy_max: float) -> List[int]:
    """All k with |k + c| <= energy_max + 1/2."""
    if energy_max < 0:
        raise ValueError("energy_max must be non-negative")
    bound = energy_max + 0.5
    lo = math.ceil(-bound - c - 1e-12)
    hi = math.floor(bound - c + 1e-12)
    return [k for k in range(lo, hi + 1) if abs(k + c) <= bound + 1e-12]


def s_line(k: int, constants: FluxConstants) -> Optional[SpectralLine]:
    """Line from the 2-D zero modes of block k (None when m = k)."""
    chern = constants.m - k
    if chern == 0:
        return None
    spin = 1 if chern > 0 else -1
    value = spin * (k + constants.c) - 0.5
    return SpectralLine(value=value, multiplicity=abs(chern), k=k, kind="S", spin=spin)


def branch_lines(k: int, c: float, positive: Sequence[Tuple[float, int]]) -> List[SpectralLine]:
    out = []
    for lam, mult in positive:
        root = math.sqrt(lam * lam + (k + c) ** 2)
        for sign in (1, -1):
            out.append(SpectralLine(value=sign * root - 0.5, multiplicity=mult, k=k, kind="branch",
                                    lam=lam, branch=sign))
    return out


def merge_lines(lines: Sequence[SpectralLine], tol: float = MERGE_TOL, warn: bool = True):
    """Deterministic band merge of lines sorted by value.

    Returns merged lines plus the list of near misses (distinct groups
    within 10x the tolerance), each of which raises a MergeCollision warning.
    """
    ordered = sorted(lines, key=SpectralLine.sort_key)
    groups: List[List[SpectralLine]] = []
    for line in ordered:
        if groups and abs(line.value - groups[-1][-1].value) <= tol * max(1.0, abs(line.value)):
            groups[-1].append(line)
        else:
            groups.append([line])
    merged = []
    for grp in groups:
        exact = [g for g in grp if g.kind == "S"]
        rep = exact[0].value if exact else float(np.mean([g.value for g in grp]))
        merged.append(MergedLine(value=rep, multiplicity=sum(g.multiplicity for g in grp), origins=tuple(grp)))
    near = []
    for a, b in zip(merged, merged[1:]):
        gap = abs(b.value - a.value)
        if gap <= 10.0 * tol * max(1.0, abs(b.value)):
            near.append((a.value, b.value))
            if warn:
                warnings.warn(f"lines {a.value!r} and {b.value!r} lie within 10x the merge tolerance "
                              f"but were not merged", MergeCollision, stacklevel=2)
    return tuple(merged), near


def _thread_count(threads: Optional[int]) -> int:
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "0")
        try:
            threads = int(raw)
        except ValueError:
            threads = 0
    if threads <= 0:
        threads = min(8, os.cpu_count() or 1)
    return threads


def _block(g: FieldProfile, constants: FluxConstants, k: int, energy_max: float, n_theta: int,
           doublings: int, stencil: str):
    """Lines and diagnostics of block k."""
    c, m = constants.c, constants.m
    chern = m - k
    cutoff = window_cutoff(energy_max)
    lines: List[SpectralLine] = []
    sline = s_line(k, constants)
    if sline is not None and abs(sline.value) <= cutoff:
        lines.append(sline)
    window2d = (energy_max + 0.5) ** 2 - (k + c) ** 2
    diag = {"chern": chern, "window_2d": math.sqrt(max(window2d, 0.0))}
    if window2d > 1e-12:
        gauge = build_gauge(reduced_flux_density(g, k, constants), chern)
        spec = spectrum_2d(gauge, math.sqrt(window2d), n_theta, doublings=doublings, stencil=stencil)
        for line in branch_lines(k, c, spec.positive_spectrum()):
            if abs(line.value) <= cutoff:
                lines.append(line)
        rich = spec.diagnostics["richardson_error"]
        diag.update({
            "zero_modes": spec.zero_modes.count,
            "zero_mode_spin": spec.zero_modes.spin,
            "index_consistent": spec.zero_modes.count == abs(chern) and spec.zero_modes.index == chern,
            "symmetry_defect": spec.symmetry_defect(),
            "richardson_error": max(rich.values()) if rich else None,
            "sectors": sorted(spec.sector_table),
        })
    return k, lines, diag


def assemble_spectrum(g: FieldProfile, energy_max: float, n_theta: int = 2048, doublings: int = 1,
                      stencil: str = "regular", threads: Optional[int] = None,
                      k_order: Optional[Sequence[int]] = None) -> SpectrumReport:
    """All eigenvalues of D_M with |value| <= energy_max, with multiplicities.

    Blocks run concurrently; the merge is a single fold over lines sorted by
    value, so the report does not depend on the processing order.
    """
    if not energy_max >= 0 or not math.isfinite(energy_max):
        raise ValueError("energy_max must be a finite non-negative number")
    constants = flux_and_constants(g)
    ks = k_window(constants.c, energy_max)
    if k_order is not None:
        if sorted(k_order) != ks:
            raise ValueError("k_order must be a permutation of the k window")
        ks = list(k_order)
    workers = _thread_count(threads)
    if workers > 1 and len(ks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda k: _block(g, constants, k, energy_max, n_theta, doublings, stencil), ks))
    else:
        results = [_block(g, constants, k, energy_max, n_theta, doublings, stencil) for k in ks]
    results.sort(key=lambda item: item[0])
    lines = [line for _, block_lines, _ in results for line in block_lines]
    merged, near = merge_lines(lines)
    diagnostics = {k: d for k, _, d in results}
    mixed = [ml.value for ml in merged if ml.mixed]
    kernel = sum(ml.multiplicity for ml in merged if abs(ml.value) <= MERGE_TOL)
    settings = {"n_theta": n_theta, "doublings": doublings, "stencil": stencil,
                "merge_tolerance": MERGE_TOL, "near_misses": [list(pair) for pair in near], "mixed_origin_values": mixed}
    return SpectrumReport(field=g, constants=constants, window=float(energy_max),
                          lines=tuple(sorted(lines, key=SpectralLine.sort_key)), merged=merged,
                          kernel_dim=int(kernel), per_k_diagnostics=diagnostics, settings=settings)


def kernel_closed_form(m: int) -> int:
    """Kernel dimension for c = 1/2: m if m > 0, -m-1 if m < -1, else 0."""
    if m > 0:
        return m
    if m < -1:
        return -m - 1
    return 0


def kernel_dimension(g: FieldProfile, require_closed_form: bool = False, n_theta: int = 512,
                     cross_check: bool = True) -> int:
    """dim Ker D_M, from the closed form when c = 1/2 (cross-checked) or numerically."""
    constants = flux_and_constants(g)
    if constants.c != 0.5:
        if require_closed_form:
            raise HypothesisViolation(f"closed form needs c = 1/2, got c = {constants.c!r}")
        return assemble_spectrum(g, 0.5, n_theta).kernel_dim
    closed = kernel_closed_form(constants.m)
    if cross_check:
        numeric = assemble_spectrum(g, 0.5, n_theta).kernel_dim
        if numeric != closed:
            raise NumericalError(f"assembled kernel {numeric} disagrees with the closed form {closed}")
    return closed


# block-level algebra -----------------------------------------------------

def block_apply(op: SectorOperator, k: int, c: float, vector: np.ndarray) -> np.ndarray:
    """(D_N - 1/2 + (k + c) sigma(nu)) applied in the real sector representation."""
    v = np.asarray(vector)
    return op.apply(v) - 0.5 * v + (k + c) * op.spin * v


@dataclass(frozen=True)
class LiftedPair:
    plus: np.ndarray
    minus: np.ndarray
    value_plus: float
    value_minus: float
    residual_plus: float
    residual_minus: float


def lift_eigenvectors(xi: np.ndarray, lam: float, k: int, c: float, op: SectorOperator) -> LiftedPair:
    """Eigenvectors chi^+- of the block operator built from a 2-D eigenvector xi.

    chi = xi + t sigma xi with t = (-lambda +- sqrt(lambda^2 + (k+c)^2)) / (k+c);
    when k + c = 0 the pair is (xi, sigma xi).  Residuals are relative to |chi|.
    """
    if not lam > 0:
        raise ValueError("lift needs a positive 2-D eigenvalue")
    xi = np.asarray(xi, dtype=float)
    sxi = op.spin * xi
    shift = k + c
    root = math.sqrt(lam * lam + shift * shift)
    if shift == 0:
        plus, minus = xi.copy(), sxi
    else:
        plus = xi + (-lam + root) / shift * sxi
        minus = xi + (-lam - root) / shift * sxi
    vp, vm = root - 0.5, -root - 0.5

    def rel(chi, val):
        return float(np.linalg.norm(block_apply(op, k, c, chi) - val * chi) / np.linalg.norm(chi))

    return LiftedPair(plus, minus, vp, vm, rel(plus, vp), rel(minus, vm))


def block_identity_check(k: int, gauge: GaugeData, c: float, n_theta: int = 64,
                         sectors: Optional[Sequence[int]] = None) -> Tuple[float, float]:
    """Anticommutator residuals of the assembled block matrices.

    Returns max over sectors of
    |{D~, sigma} - (2(k+c) I - sigma)| / |D~|  and  |{D_N, sigma}| / |D_N|
    in Frobenius norm, with D~ = D_N - 1/2 + (k+c) sigma.
    """
    n = gauge.n
    if sectors is None:
        sectors = range(-abs(n) - 2, abs(n) + 2)
    worst_tilde = worst_plain = 0.0
    for j in sectors:
        op = reduce_axisymmetric(gauge, j, n_theta)
        d = op.matrix
        sigma = np.diag(op.spin.astype(complex))
        eye = np.eye(op.size)
        tilde = d - 0.5 * eye + (k + c) * sigma
        anti_tilde = tilde @ sigma + sigma @ tilde
        anti_plain = d @ sigma + sigma @ d
        worst_tilde = max(worst_tilde, float(np.linalg.norm(anti_tilde - (2 * (k + c) * eye - sigma))
                                             / np.linalg.norm(tilde)))
        worst_plain = max(worst_plain, float(np.linalg.norm(anti_plain) / np.linalg.norm(d)))
    return worst_tilde, worst_plain


@dataclass(frozen=True)
class LowerBoundResult:
    kernel_dim: int
    flux_bound: int
    passed: bool
    equality: bool
    applicable: bool
    contributing_blocks: Tuple[int, ...]
    block_counts: Dict[int, Tuple[int, int]]
    note: str = ""


def lower_bound_check(g: FieldProfile, n_theta: int = 512) -> LowerBoundResult:
    """Compare the kernel with the flux of the blocks that produce it.

    For every block k that contributes the value 0 the 2-D kernel of the
    gauged operator (counted by the eigensolver) must be at least |m - k|;
    the reported bound is |m - k| of the zero-producing S_k line.  When no
    block produces 0 the bound is |m| and only meaningful if m = 0.
    """
    report = assemble_spectrum(g, 0.5, n_theta)
    m = report.constants.m
    zero_lines = [line for ml in report.merged if abs(ml.value) <= MERGE_TOL for line in ml.origins]
    blocks = tuple(sorted({line.k for line in zero_lines}))
    counts = {}
    ok = True
    for k in blocks:
        found = report.per_k_diagnostics[k].get("zero_modes", 0)
        counts[k] = (found, abs(m - k))
        ok = ok and found >= abs(m - k)
    s_blocks = [line.k for line in zero_lines if line.kind == "S"]
    if s_blocks:
        bound = abs(m - s_blocks[0])
        applicable = True
        note = f"kernel carried by S_{s_blocks[0]}"
    elif m == 0:
        bound, applicable, note = 0, True, "zero total flux"
    else:
        bound, applicable = abs(m), False
        note = "no block produces the value 0; the bound concerns the 2-D blocks only"
    passed = ok and (report.kernel_dim >= bound if applicable else True)
    return LowerBoundResult(kernel_dim=report.kernel_dim, flux_bound=bound, passed=passed,
                            equality=applicable and report.kernel_dim == bound, applicable=applicable,
                            contributing_blocks=blocks, block_counts=counts, note=note)
