"""Axisymmetric 2-D Dirac operator on N = (S^2, g_2/4), discretized by sector.

Substituting u_+ = Omega_N^{-1/2} (P(r) e^{ij phi}, Q(r) e^{i(j+1) phi}) and
p = sqrt(r) P, q = sqrt(r) Q into the chart-plus operator gives, in the polar
angle theta (measure uniform in theta),

    lambda p = -2i (d_theta + W) q,    lambda q = -2i (d_theta - W) p,
    W(theta) = (j + 1/2 - F(theta)) / sin(theta),

with F the enclosed-flux fraction.  Near the north pole p ~ theta^(j+1/2) or
q ~ theta^(-j-1/2) (whichever is regular); near the south pole the exponents
shift by the Chern number n through the chart transition.

Grid: p and q live on interleaved nodes of a uniform staggered grid (a
first-order system needs only one unknown per node).  Each q-row holds a
centred difference of p over its two p-neighbours; the p-rows are the exact
transpose, so the real symmetric tridiagonal matrix is Hermitian by
construction.  The ``regular`` stencil multiplies the one-sided pole
behaviour into the difference quotient (exact for the reference profile
sin(theta/2)^(j+1/2) cos(theta/2)^(n-j-1/2)); ``dirichlet`` is the plain
centred stencil with zero boundary values; ``fitted`` exponentiates the full
integrating factor of W and is exact for any zero mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import AmbiguousZeroMode, GridTooCoarse
from .linalg_core import eigh, eigh_tridiagonal
from .sphere_bundle import GaugeData

STENCILS = ("regular", "dirichlet", "fitted")
MIN_NODES = 16
MERGE_TOL = 1e-6
ZERO_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class SectorOperator:
    """Discretized radial Dirac system of one azimuthal sector.

    ``offdiag`` is the off-diagonal of the real symmetric tridiagonal form;
    ``matrix`` is the unitarily equivalent complex Hermitian form acting on
    (p, q) samples with the -2i factors of the continuous operator.
    """

    j: int
    n: int
    grid: np.ndarray
    is_upper: np.ndarray
    offdiag: np.ndarray
    weights: np.ndarray
    stencil: str

    @property
    def size(self) -> int:
        return int(self.grid.size)

    @property
    def spin(self) -> np.ndarray:
        """Diagonal of sigma(nu): +1 on upper (p) nodes, -1 on lower (q) nodes."""
        return np.where(self.is_upper, 1.0, -1.0)

    @property
    def phases(self) -> np.ndarray:
        return np.where(self.is_upper, 1.0 + 0j, 1j)

    def real_matrix(self) -> np.ndarray:
        t = np.zeros((self.size, self.size))
        idx = np.arange(self.size - 1)
        t[idx, idx + 1] = self.offdiag
        t[idx + 1, idx] = self.offdiag
        return t

    @property
    def matrix(self) -> np.ndarray:
        ph = self.phases
        return ph[:, None] * self.real_matrix() * np.conj(ph)[None, :]

    def apply(self, vector: np.ndarray) -> np.ndarray:
        """Real tridiagonal form applied to a real or complex node vector."""
        v = np.asarray(vector)
        out = np.zeros_like(v, dtype=np.result_type(v, float))
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out

    def hermiticity_residual(self) -> float:
        a = self.matrix
        return float(np.linalg.norm(a - a.conj().T) / max(np.linalg.norm(a), 1e-300))


def sector_layout(j: int, n: int, n_theta: int) -> Tuple[np.ndarray, np.ndarray, float]:
    """Staggered grid for sector j: node angles, upper-node mask, stencil width.

    The node adjacent to each pole carries the component that is regular
    there (upper at the north pole when j + 1/2 > 0, upper at the south pole
    when j + 1/2 - n < 0).
    """
    north_upper = j + 0.5 > 0
    south_upper = j + 0.5 - n < 0
    count = 2 * n_theta - 1 if north_upper == south_upper else 2 * n_theta
    spacing = math.pi / (count + 1)
    theta = spacing * np.arange(1, count + 1)
    is_upper = (np.arange(count) % 2 == 0) == north_upper
    return theta, is_upper, 2.0 * spacing


def _signed_flux_integral(gauge: GaugeData, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """int_a^b F/sin with orientation."""
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    val = gauge.flux_over_sine_integral(lo, hi)
    return np.where(b >= a, val, -val)


def reduce_axisymmetric(gauge: GaugeData, j: int, n_theta: int, stencil: str = "regular") -> SectorOperator:
    """Sector operator for azimuthal index j on a grid of about 2 n_theta nodes."""
    if n_theta < MIN_NODES:
        raise GridTooCoarse(f"N_theta = {n_theta} is below the minimum {MIN_NODES}")
    if stencil not in STENCILS:
        raise ValueError(f"unknown stencil {stencil!r}; choose from {STENCILS}")
    n = gauge.n
    theta, is_upper, width = sector_layout(j, n, n_theta)
    kappa = j + 0.5
    # for each adjacent pair: the lower node y and its upper neighbour x
    left_upper = is_upper[:-1]
    y = np.where(left_upper, theta[1:], theta[:-1])
    x = np.where(left_upper, theta[:-1], theta[1:])
    sign = np.where(left_upper, -1.0, 1.0)
    flux = gauge.enclosed_flux(y)
    w_at_y = (kappa - flux) / np.sin(y)
    if stencil == "dirichlet":
        coef = sign / width - 0.5 * w_at_y
    elif stencil == "regular":
        def log_ref(t):
            return kappa * np.log(np.sin(t / 2.0)) + (n - kappa) * np.log(np.cos(t / 2.0))

        w_ref = kappa / np.sin(y) - 0.5 * n * np.tan(y / 2.0)
        coef = sign * np.exp(log_ref(y) - log_ref(x)) / width - 0.5 * (w_at_y - w_ref)
    else:
        # integral of W from x to y: kappa log tan(t/2) minus the flux part
        log_factor = kappa * (np.log(np.tan(y / 2.0)) - np.log(np.tan(x / 2.0))) \
            - _signed_flux_integral(gauge, x, y)
        coef = sign * np.exp(log_factor) / width
    weights = np.full(theta.size, math.pi * width)
    return SectorOperator(j=int(j), n=int(n), grid=theta, is_upper=is_upper, offdiag=-2.0 * coef,
                          weights=weights, stencil=stencil)


@dataclass(frozen=True)
class SectorSolution:
    eigenvalues: np.ndarray
    vectors: Optional[np.ndarray] = None


def solve_sector(op, window: Optional[Tuple[float, float]] = None, want_vectors: bool = False,
                 backend: str = "lapack") -> SectorSolution:
    """Ascending eigenvalues of a sector operator (optionally inside a window).

    A plain Hermitian array is accepted as well and routed to the dense
    solver, which serves as a sanity path for small matrices.
    """
    if isinstance(op, SectorOperator):
        w, v = eigh_tridiagonal(np.zeros(op.size), op.offdiag, window=window, want_vectors=want_vectors,
                                backend=backend)
        return SectorSolution(np.asarray(w), v)
    dec = eigh(np.asarray(op, dtype=complex), want_vectors=want_vectors)
    w, v = dec.eigenvalues, dec.eigenvectors
    if window is not None:
        keep = (w > window[0]) & (w <= window[1])
        w = w[keep]
        v = v[:, keep] if v is not None else None
    return SectorSolution(w, v)


@dataclass(frozen=True)
class ZeroModeSummary:
    count: int
    spin: int
    spins: Tuple[int, ...] = ()

    @property
    def index(self) -> int:
        return int(sum(self.spins))


@dataclass(frozen=True, eq=False)
class KernelVector:
    """Discrete zero mode of one sector at the finest grid level."""

    j: int
    grid: np.ndarray
    is_upper: np.ndarray
    vector: np.ndarray
    spin: int


@dataclass(frozen=True, eq=False)
class Spectrum2D:
    n: int
    eigenvalues: np.ndarray
    multiplicities: np.ndarray
    zero_modes: ZeroModeSummary
    sector_table: Dict[int, np.ndarray]
    kernel: Tuple[KernelVector, ...] = ()
    diagnostics: dict = field(default_factory=dict)

    def positive_spectrum(self) -> List[Tuple[float, int]]:
        return [(float(v), int(m)) for v, m in zip(self.eigenvalues, self.multiplicities) if v > 0]

    def symmetry_defect(self) -> float:
        """Largest mismatch between the positive and negated negative spectrum."""
        pos = [(v, m) for v, m in zip(self.eigenvalues, self.multiplicities) if v > 0]
        neg = [(-v, m) for v, m in zip(self.eigenvalues, self.multiplicities) if v < 0][::-1]
        if len(pos) != len(neg):
            return math.inf
        if not pos:
            return 0.0
        if any(a[1] != b[1] for a, b in zip(pos, neg)):
            return math.inf
        return float(max(abs(a[0] - b[0]) / max(1.0, a[0]) for a, b in zip(pos, neg)))


def window_cutoff(energy_max: float, tol: float = MERGE_TOL) -> float:
    """Inclusive window edge; values within merge tolerance of it count as inside."""
    return energy_max + tol * max(1.0, abs(energy_max))


def merge_values(values: Sequence[float], tol: float = MERGE_TOL) -> Tuple[np.ndarray, np.ndarray]:
    """Group sorted values whose neighbours differ by at most tol * max(1, |v|)."""
    vals = np.sort(np.asarray(values, dtype=float))
    out_v: List[float] = []
    out_m: List[int] = []
    group: List[float] = []
    for v in vals:
        if group and abs(v - group[-1]) > tol * max(1.0, abs(v)):
            out_v.append(float(np.mean(group)))
            out_m.append(len(group))
            group = []
        group.append(float(v))
    if group:
        out_v.append(float(np.mean(group)))
        out_m.append(len(group))
    return np.array(out_v), np.array(out_m, dtype=int)


def _classify(values: np.ndarray, top: float, zero_tol: float):
    """Split eigenvalues into zero, ambiguous and nonzero by the gap rule.

    The gap reference is the smallest |lambda| that is not itself below
    10 * zero_tol times the window scale; without such a value the window
    top stands in for it.
    """
    a = np.abs(values)
    scale = max(top, 1.0)
    candidates = a[a >= 10.0 * zero_tol * scale]
    gap = float(candidates.min()) if candidates.size else scale
    zero = a < zero_tol * gap
    ambiguous = (a >= zero_tol * gap) & (a < 10.0 * zero_tol * gap)
    return zero, ambiguous, gap


def _sector_pass(gauge, j, levels, window_top, zero_tol, stencil, backend):
    """Eigenvalues at each grid level plus kernel vectors at the finest one."""
    per_level = []
    zero_counts = []
    kernel: List[KernelVector] = []
    gap = None
    for li, n_theta in enumerate(levels):
        op = reduce_axisymmetric(gauge, j, n_theta, stencil)
        sol = solve_sector(op, window=(-window_top, window_top), backend=backend)
        w = sol.eigenvalues
        zero, ambiguous, gap = _classify(w, window_top, zero_tol)
        if np.any(ambiguous):
            raise AmbiguousZeroMode(
                f"sector j={j}, N_theta={n_theta}: eigenvalue {w[ambiguous][0]:.3e} is inside the "
                f"ambiguity band; refine the grid")
        zero_counts.append(int(zero.sum()))
        per_level.append(w[~zero])
        if li == len(levels) - 1 and zero.any():
            band = zero_tol * gap
            ks = solve_sector(op, window=(-band, band), want_vectors=True, backend=backend)
            for col in range(ks.vectors.shape[1]):
                v = ks.vectors[:, col]
                up = float(np.sum(v[op.is_upper] ** 2))
                lo = float(np.sum(v[~op.is_upper] ** 2))
                kernel.append(KernelVector(j=j, grid=op.grid, is_upper=op.is_upper, vector=v,
                                           spin=1 if up >= lo else -1))
    if len(set(zero_counts)) > 1:
        raise AmbiguousZeroMode(f"sector j={j}: zero-mode count changes across grid levels {zero_counts}")
    return per_level, zero_counts[-1], kernel


def _extrapolate(per_level: List[np.ndarray]):
    """Richardson extrapolation of index-paired eigenvalues (second order)."""
    def paired(level_vals):
        pos = [np.sort(v[v > 0]) for v in level_vals]
        neg = [np.sort(-v[v < 0]) for v in level_vals]
        kp = min(len(v) for v in pos)
        kn = min(len(v) for v in neg)
        return [v[:kp] for v in pos], [v[:kn] for v in neg]

    pos, neg = paired(per_level)

    def rich(seq):
        if len(seq) == 1:
            return seq[-1], np.full(seq[-1].shape, np.nan)
        best = (4.0 * seq[-1] - seq[-2]) / 3.0
        if len(seq) >= 3:
            prev = (4.0 * seq[-2] - seq[-3]) / 3.0
            err = np.abs(best - prev)
        else:
            err = np.abs(seq[-1] - seq[-2]) / 3.0
        return best, err

    p, pe = rich(pos)
    q, qe = rich(neg)
    values = np.concatenate([-q[::-1], p])
    errors = np.concatenate([qe[::-1], pe])
    return values, errors


def spectrum_2d(gauge: GaugeData, energy_max: float, n_theta: int = 2048, doublings: int = 1,
                zero_tol: float = ZERO_TOL, stencil: str = "regular", backend: str = "lapack",
                want_kernel: bool = False) -> Spectrum2D:
    """Spectrum of the 2-D Dirac operator with |lambda| <= energy_max.

    Grid levels are n_theta * 2^i for i = 0..doublings; with at least one
    doubling the reported eigenvalues are Richardson extrapolated from the
    two finest levels.  Zero modes are counted on every level and must agree.
    """
    if not energy_max > 0:
        raise ValueError("energy_max must be positive")
    if doublings < 0:
        raise ValueError("doublings must be non-negative")
    levels = [n_theta * 2 ** i for i in range(doublings + 1)]
    # margin so that eigenvalues near the edge pair up across levels
    window_top = energy_max * (1.0 + 1e-3) + 1e-3
    n = gauge.n
    sector_table: Dict[int, np.ndarray] = {}
    errors: Dict[int, float] = {}
    kernel: List[KernelVector] = []
    zero_total = 0

    def run(j):
        nonlocal zero_total
        per_level, zeros, kern = _sector_pass(gauge, j, levels, window_top, zero_tol, stencil, backend)
        vals, errs = _extrapolate(per_level)
        keep = np.abs(vals) <= window_cutoff(energy_max)
        vals, errs = vals[keep], errs[keep]
        sector_table[j] = vals
        if errs.size and np.all(np.isfinite(errs)):
            errors[j] = float(errs.max())
        zero_total += zeros
        kernel.extend(kern)
        return vals.size + zeros > 0

    # the zero-mode sectors lie in [min(0, n), max(0, n) - 1]; scan past them
    up_guard = max(0, n)
    down_guard = min(-1, n - 1)
    for start, step, guard in ((0, 1, up_guard), (-1, -1, down_guard)):
        j, empty = start, 0
        while empty < 2 or (j - guard) * step <= 0:
            empty = 0 if run(j) else empty + 1
            j += step

    nonzero = np.concatenate([v for v in sector_table.values()]) if sector_table else np.zeros(0)
    values, mults = merge_values(nonzero)
    if zero_total:
        zpos = np.searchsorted(values, 0.0)
        values = np.insert(values, zpos, 0.0)
        mults = np.insert(mults, zpos, zero_total)
    spins = tuple(kv.spin for kv in sorted(kernel, key=lambda kv: kv.j))
    uniform = len(set(spins)) == 1
    summary = ZeroModeSummary(count=zero_total, spin=(spins[0] if uniform else 0) if spins else 0,
                              spins=spins)
    diagnostics = {"levels": levels, "richardson_error": errors, "stencil": stencil}
    return Spectrum2D(n=n, eigenvalues=values, multiplicities=mults, zero_modes=summary,
                      sector_table=dict(sorted(sector_table.items())),
                      kernel=tuple(sorted(kernel, key=lambda kv: kv.j) if want_kernel else ()),
                      diagnostics=diagnostics)
