"""Explicit zero modes of the 2-D Dirac operator on S^2.

In a chart the zero-mode equation for the flat operator is solved by
v = f e^{-h/4} (upper component, f holomorphic) when the Chern number n is
positive, and by v = conj(f) e^{+h/4} (lower component) when n is negative.
Integrability across both charts restricts f to polynomials of degree below
|n|.  Round-metric sections are u = Omega_N^{-1/2} v.

Chart-minus data use the monomials z^a (a = 0..|n|-1) and
h_-(z) = h_+(4/|z|) + 4 n log|z|; chart-plus data follow from the chart
transition and carry the single power w^(|n|-1-a).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import subspace_angles

from .dirac2d import Spectrum2D, reduce_axisymmetric
from .sphere_bundle import ChartSpinorField, GaugeData, conformal_factor, theta_to_radius


@dataclass(frozen=True, eq=False)
class ZeroModeBasis:
    """Zero modes built from monomials (not orthogonalized)."""

    n: int
    modes: Tuple[ChartSpinorField, ...]
    spin: int
    h_source: GaugeData
    sectors: Tuple[int, ...]
    plus_coefficients: Tuple[float, ...]
    gram: np.ndarray
    condition_number: float

    def __len__(self) -> int:
        return len(self.modes)

    @property
    def is_empty(self) -> bool:
        return not self.modes

    def sector_profile(self, index: int, theta) -> np.ndarray:
        """Real amplitude of mode ``index`` in the sector variable of dirac2d.

        Equals sqrt(r) |v_+| with the sign of the chart-plus coefficient, i.e.
        the p (n > 0) or q (n < 0) component on a uniform-theta measure.
        """
        theta = np.asarray(theta, dtype=float)
        r = theta_to_radius(theta)
        power = abs(self.n) - 1 - index
        exponent = -self.spin * 0.25 * self.h_source.h(r)
        return self.plus_coefficients[index] * np.exp((power + 0.5) * np.log(r) + exponent)


def _plus_coefficient(n: int, degree: int) -> float:
    """Chart-plus coefficient of w^(|n|-1-a) matching the chart-minus monomial z^a."""
    size = abs(n)
    if n > 0:
        return (-1.0) ** degree * 4.0 ** (degree - size + 1) / 2.0
    return 2.0 * (-1.0) ** degree * 4.0 ** (degree - size)


def _make_mode(gauge: GaugeData, degree: int) -> ChartSpinorField:
    n = gauge.n
    size = abs(n)
    spin = 1 if n > 0 else -1
    coef = _plus_coefficient(n, degree)

    def plus(w):
        w = np.asarray(w, dtype=complex)
        r = np.abs(w)
        weight = conformal_factor(r) ** -0.5
        if spin > 0:
            comp = coef * w ** (size - 1 - degree) * np.exp(-0.25 * gauge.h(r))
            return np.stack([weight * comp, np.zeros_like(comp)], axis=-1)
        comp = coef * np.conj(w) ** (size - 1 - degree) * np.exp(0.25 * gauge.h(r))
        return np.stack([np.zeros_like(comp), weight * comp], axis=-1)

    def minus(z):
        z = np.asarray(z, dtype=complex)
        rho = np.abs(z)
        h_minus = gauge.h(4.0 / rho) + 4.0 * n * np.log(rho)
        weight = conformal_factor(rho) ** -0.5
        if spin > 0:
            comp = z ** degree * np.exp(-0.25 * h_minus)
            return np.stack([weight * comp, np.zeros_like(comp)], axis=-1)
        comp = np.conj(z) ** degree * np.exp(0.25 * h_minus)
        return np.stack([np.zeros_like(comp), weight * comp], axis=-1)

    return ChartSpinorField(chern=n, plus=plus, minus=minus, label=f"monomial z^{degree}")


def _gram(modes, nodes: int = 2048, angles: int = 16) -> np.ndarray:
    """L^2(S^2, vol_N) inner products, sampled in chart plus over theta."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    theta = 0.5 * math.pi * (x + 1.0)
    weights = 0.5 * math.pi * w * np.sin(theta) / 4.0  # vol_N = (1/4) sin dtheta dphi
    phi = 2.0 * math.pi * np.arange(angles) / angles
    radii = theta_to_radius(theta)
    samples = [m.plus_grid(radii, phi) for m in modes]
    size = len(modes)
    gram = np.zeros((size, size), dtype=complex)
    for i in range(size):
        for k in range(i, size):
            dens = np.sum(np.conj(samples[i]) * samples[k], axis=-1)
            val = np.sum(weights[:, None] * dens) * 2.0 * math.pi / angles
            gram[i, k] = val
            gram[k, i] = np.conj(val)
    return gram


def build_zero_modes(gauge: GaugeData) -> ZeroModeBasis:
    """|n| zero modes of spin sgn(n); an empty basis when n = 0."""
    n = gauge.n
    if n == 0:
        return ZeroModeBasis(n=0, modes=(), spin=0, h_source=gauge, sectors=(), plus_coefficients=(),
                             gram=np.zeros((0, 0)), condition_number=1.0)
    size = abs(n)
    spin = 1 if n > 0 else -1
    modes = tuple(_make_mode(gauge, a) for a in range(size))
    # upper phase e^{ij phi} with j = n-1-a; lower phase e^{i(j+1) phi} = e^{-i(|n|-1-a) phi}
    sectors = tuple((size - 1 - a) if n > 0 else -(size - 1 - a) - 1 for a in range(size))
    gram = _gram(modes)
    cond = float(np.linalg.cond(gram))
    return ZeroModeBasis(n=n, modes=modes, spin=spin, h_source=gauge, sectors=sectors,
                         plus_coefficients=tuple(_plus_coefficient(n, a) for a in range(size)),
                         gram=gram, condition_number=cond)


def sampled_sector_vector(basis: ZeroModeBasis, index: int, op) -> np.ndarray:
    """Mode ``index`` sampled on the nodes of a sector operator of matching j."""
    vec = np.zeros(op.size)
    mask = op.is_upper if basis.spin > 0 else ~op.is_upper
    vec[mask] = basis.sector_profile(index, op.grid[mask])
    return vec


def residual_check(basis: ZeroModeBasis, n_grid: int, stencil: str = "regular") -> float:
    """Largest relative residual |T v| / |v| of the sampled modes."""
    worst = 0.0
    for index, j in enumerate(basis.sectors):
        op = reduce_axisymmetric(basis.h_source, j, n_grid, stencil)
        vec = sampled_sector_vector(basis, index, op)
        worst = max(worst, float(np.linalg.norm(op.apply(vec)) / np.linalg.norm(vec)))
    return worst


def transition_residuals(basis: ZeroModeBasis) -> List[float]:
    return [m.transition_residual() for m in basis.modes]


def spin_purity(basis: ZeroModeBasis, radii=None, angles=None) -> float:
    """Largest modulus of the opposite-spin component in both charts."""
    radii = np.geomspace(1e-2, 1e2, 41) if radii is None else radii
    angles = np.linspace(0.0, 2 * math.pi, 12, endpoint=False) if angles is None else angles
    off = 1 if basis.spin > 0 else 0
    worst = 0.0
    for m in basis.modes:
        for grid in (m.plus_grid(radii, angles), m.minus_grid(radii, angles)):
            worst = max(worst, float(np.max(np.abs(grid[..., off]))))
    return worst


def kernel_subspace_angle(basis: ZeroModeBasis, spectrum: Spectrum2D) -> float:
    """Largest principal angle between the explicit basis and the solver kernel.

    Sectors are orthogonal, so both subspaces are laid out as direct sums of
    the per-sector node vectors taken from the solver's finest grid.
    """
    kernel = list(spectrum.kernel)
    if len(kernel) != len(basis):
        return math.pi / 2
    js = sorted(set(kv.j for kv in kernel) | set(basis.sectors))
    offsets = {}
    total = 0
    grids = {kv.j: kv for kv in kernel}
    for j in js:
        if j not in grids:
            return math.pi / 2
        offsets[j] = total
        total += grids[j].grid.size
    solver = np.zeros((total, len(kernel)))
    for col, kv in enumerate(kernel):
        solver[offsets[kv.j]:offsets[kv.j] + kv.vector.size, col] = kv.vector
    explicit = np.zeros((total, len(basis)))
    for index, j in enumerate(basis.sectors):
        kv = grids[j]
        mask = kv.is_upper if basis.spin > 0 else ~kv.is_upper
        vec = np.zeros(kv.grid.size)
        vec[mask] = basis.sector_profile(index, kv.grid[mask])
        explicit[offsets[j]:offsets[j] + vec.size, index] = vec
    return float(np.max(subspace_angles(solver, explicit)))


def decay_exponent(basis: ZeroModeBasis, index: int = 0, radii: Optional[np.ndarray] = None) -> float:
    """Log-log slope of |v_+| (without conformal weight) at large chart radius."""
    radii = np.array([1e3, 1e4]) if radii is None else np.asarray(radii)
    vals = np.abs(basis.modes[index].plus(radii.astype(complex)))
    amp = np.max(vals, axis=-1) * np.sqrt(conformal_factor(radii))
    return float(np.diff(np.log(amp))[0] / np.diff(np.log(radii))[0])
