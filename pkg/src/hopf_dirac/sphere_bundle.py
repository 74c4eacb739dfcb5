"""Axisymmetric flux profiles on N = (S^2, g_2/4), flux constants and gauges.

Charts: z_+ is stereographic from the south pole with r = |z_+| = 2 tan(theta/2)
(theta = 0 is the north pole at z_+ = 0); z_- = -4 / z_+.  The round metric
of radius 1/2 is Omega_N^2 |dz|^2 with Omega_N = (1/2) / (1 + r^2/4).

Flux bookkeeping uses the enclosed-flux fraction
    F(theta) = (1/4) int_0^theta g(t) sin t dt,
so that F(pi) is the total flux (1/2pi) int g vol_N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator

from .errors import FluxMismatch, QuadratureFailure
from .linalg_core import cumulative_log

HALF_SNAP_TOL = 1e-12
FLUX_TOL = 1e-9

_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def _gauss_legendre(func: Callable[[np.ndarray], np.ndarray], a, b) -> np.ndarray:
    """Vectorised 10-point Gauss-Legendre on [a, b] (arrays broadcast)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = mid[..., None] + half[..., None] * _GL_X
    return half * np.sum(_GL_W * func(nodes), axis=-1)


def theta_to_radius(theta):
    return 2.0 * np.tan(np.asarray(theta, dtype=float) / 2.0)


def radius_to_theta(r):
    return 2.0 * np.arctan(np.asarray(r, dtype=float) / 2.0)


def conformal_factor(r):
    """Omega_N(r) = (1/2)(1 + r^2/4)^(-1)."""
    r = np.asarray(r, dtype=float)
    return 0.5 / (1.0 + r * r / 4.0)


@dataclass(frozen=True, eq=False)
class FieldProfile:
    """Axisymmetric field strength g(theta), constant or sampled (PCHIP)."""

    kind: str
    g0: float = 0.0
    theta_nodes: Tuple[float, ...] = ()
    values: Tuple[float, ...] = ()
    _interp: Optional[PchipInterpolator] = field(default=None, repr=False, compare=False)
    _cum: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == "constant":
            if not math.isfinite(self.g0):
                raise ValueError("field strength must be finite")
        elif self.kind == "sampled":
            th = np.asarray(self.theta_nodes, dtype=float)
            va = np.asarray(self.values, dtype=float)
            if th.ndim != 1 or th.size < 2 or th.size != va.size:
                raise ValueError("sampled profile needs matching theta/value arrays of length >= 2")
            if not (np.all(np.isfinite(th)) and np.all(np.isfinite(va))):
                raise ValueError("profile values must be finite")
            bad = np.nonzero(np.diff(th) <= 0)[0]
            if bad.size:
                i = int(bad[0])
                raise ValueError(f"theta nodes not strictly increasing at pair ({float(th[i])!r}, {float(th[i + 1])!r})")
            if abs(th[0]) > 1e-12 or abs(th[-1] - math.pi) > 1e-12:
                raise ValueError("theta nodes must cover [0, pi] including both endpoints")
            th = th.copy()
            th[0], th[-1] = 0.0, math.pi
            interp = PchipInterpolator(th, va)
            pieces = _gauss_legendre(lambda t: interp(t) * np.sin(t), th[:-1], th[1:])
            cum = np.concatenate([[0.0], np.cumsum(pieces)]) / 4.0
            object.__setattr__(self, "theta_nodes", tuple(float(x) for x in th))
            object.__setattr__(self, "values", tuple(float(x) for x in va))
            object.__setattr__(self, "_interp", interp)
            object.__setattr__(self, "_cum", cum)
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")

    @classmethod
    def constant(cls, g0: float) -> "FieldProfile":
        return cls("constant", g0=float(g0))

    @classmethod
    def sampled(cls, theta_nodes, values) -> "FieldProfile":
        return cls("sampled", theta_nodes=tuple(np.asarray(theta_nodes, float)),
                   values=tuple(np.asarray(values, float)))

    @classmethod
    def from_function(cls, func: Callable[[np.ndarray], np.ndarray], nodes: int = 513) -> "FieldProfile":
        theta = np.linspace(0.0, math.pi, nodes)
        return cls.sampled(theta, func(theta))

    def __eq__(self, other):
        if not isinstance(other, FieldProfile):
            return NotImplemented
        return (self.kind, self.g0, self.theta_nodes, self.values) == (
            other.kind, other.g0, other.theta_nodes, other.values)

    def __hash__(self):
        return hash((self.kind, self.g0, self.theta_nodes, self.values))

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.kind == "constant":
            return np.full(theta.shape, self.g0)
        return self._interp(np.clip(theta, 0.0, math.pi))

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    def shifted(self, delta: float) -> "FieldProfile":
        """Profile g + delta (PCHIP commutes with adding constants)."""
        if self.kind == "constant":
            return FieldProfile.constant(self.g0 + delta)
        return FieldProfile.sampled(self.theta_nodes, np.asarray(self.values) + delta)

    def enclosed_flux(self, theta) -> np.ndarray:
        """F(theta) = (1/4) int_0^theta g sin."""
        theta = np.clip(np.asarray(theta, dtype=float), 0.0, math.pi)
        if self.kind == "constant":
            return 0.5 * self.g0 * np.sin(theta / 2.0) ** 2
        nodes = np.asarray(self.theta_nodes)
        idx = np.clip(np.searchsorted(nodes, theta, side="right") - 1, 0, nodes.size - 2)
        partial = _gauss_legendre(lambda t: self._interp(t) * np.sin(t), nodes[idx], theta)
        return self._cum[idx] + partial / 4.0

    def total_flux(self) -> float:
        if self.kind == "constant":
            return 0.5 * self.g0
        return float(self._cum[-1])

    def flux_over_sine_integral(self, a, b) -> np.ndarray:
        """int_a^b F(t)/sin(t) dt for 0 < a <= b < pi (vectorised)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.kind == "constant":
            # F/sin = (g/4) tan(t/2)
            return -0.5 * self.g0 * (np.log(np.cos(b / 2.0)) - np.log(np.cos(a / 2.0)))
        return _gauss_legendre(lambda t: self.enclosed_flux(t) / np.sin(t), a, b)

    def to_dict(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "g0": self.g0}
        return {"kind": "sampled", "theta_nodes": list(self.theta_nodes), "values": list(self.values)}

    @classmethod
    def from_dict(cls, data: dict) -> "FieldProfile":
        if data["kind"] == "constant":
            return cls.constant(data["g0"])
        return cls.sampled(data["theta_nodes"], data["values"])


@dataclass(frozen=True)
class FluxConstants:
    total_flux: float
    c: float
    m: int

    def to_dict(self) -> dict:
        return {"total_flux": self.total_flux, "c": self.c, "m": self.m}


def fractional_split(x: float) -> Tuple[float, int]:
    """Split x = <x> + [x] with <x> in (-1/2, 1/2] and [x] an integer.

    Values within 1e-12 of a half-integer snap to <x> = +1/2.
    """
    if not math.isfinite(x):
        raise ValueError("x must be finite")
    nearest_half = math.floor(x) + 0.5
    if abs(x - nearest_half) <= HALF_SNAP_TOL:
        return 0.5, int(math.floor(x))
    integer = int(math.floor(x + 0.5))
    frac = x - integer
    if frac <= -0.5:
        frac += 1.0
        integer -= 1
    return frac, integer


def flux_and_constants(g: FieldProfile) -> FluxConstants:
    total = g.total_flux()
    if not math.isfinite(total):
        raise ValueError("profile flux is not finite")
    c, m = fractional_split(total)
    return FluxConstants(total_flux=total, c=c, m=m)


def reduced_flux_density(g: FieldProfile, k: int, fc: FluxConstants) -> FieldProfile:
    """g - 2(c + k); its total flux is m - k."""
    return g.shifted(-2.0 * (fc.c + k))


DEFAULT_R_MIN = 1e-6
DEFAULT_R_MAX = 1e6
DEFAULT_R_NODES = 4096


@dataclass(frozen=True, eq=False)
class GaugeData:
    """Radial log potential h_+ with chart potentials a_+ and a_-.

    Exactly one of ``profile`` (smooth density g_N on N) or ``ring_radius``
    (all flux concentrated on the circle |z_+| = ring_radius) is set.
    """

    n: int
    r: np.ndarray
    h_radial: np.ndarray
    dh_radial: np.ndarray
    profile: Optional[FieldProfile] = None
    ring_radius: Optional[float] = None
    quadrature_error: float = 0.0
    _spline: Optional[CubicHermiteSpline] = field(default=None, repr=False)

    def __post_init__(self):
        spline = CubicHermiteSpline(np.log(self.r), self.h_radial, self.dh_radial * self.r)
        object.__setattr__(self, "_spline", spline)

    # flux fraction and its integrals -----------------------------------
    def enclosed_flux(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.profile is not None:
            return self.profile.enclosed_flux(theta)
        theta0 = float(radius_to_theta(self.ring_radius))
        return np.where(theta >= theta0, float(self.n), 0.0)

    def enclosed_flux_radial(self, r) -> np.ndarray:
        return self.enclosed_flux(radius_to_theta(r))

    def flux_over_sine_integral(self, a, b) -> np.ndarray:
        if self.profile is not None:
            return self.profile.flux_over_sine_integral(a, b)
        theta0 = float(radius_to_theta(self.ring_radius))
        a = np.maximum(np.asarray(a, dtype=float), theta0)
        b = np.asarray(b, dtype=float)
        val = self.n * (np.log(np.tan(b / 2.0)) - np.log(np.tan(a / 2.0)))
        return np.where(b > a, val, 0.0)

    def density(self, theta) -> np.ndarray:
        if self.profile is None:
            raise ValueError("ring gauges have a singular density")
        return self.profile(theta)

    # radial potential ---------------------------------------------------
    def h(self, r) -> np.ndarray:
        """h_+(r), C^1 Hermite interpolation in log r; log-linear tails.

        Ring gauges are evaluated from their closed form.
        """
        r = np.asarray(r, dtype=float)
        if self.ring_radius is not None:
            return 4.0 * self.n * np.log(np.maximum(r, self.ring_radius))
        t = np.log(np.maximum(r, 1e-300))
        t0, t1 = math.log(self.r[0]), math.log(self.r[-1])
        inside = self._spline(np.clip(t, t0, t1))
        above = self.h_radial[-1] + 4.0 * self.n * (t - t1)
        # h' = 4F/r with F ~ F(r0) (r/r0)^2 near the pole
        f0 = self.dh_radial[0] * self.r[0] / 4.0
        below = self.h_radial[0] + 2.0 * f0 * (np.exp(2.0 * (t - t0)) - 1.0)
        return np.where(t > t1, above, np.where(t < t0, below, inside))

    def dh(self, r) -> np.ndarray:
        """h_+'(r) = 4 F / r, evaluated from the exact flux fraction."""
        r = np.asarray(r, dtype=float)
        return 4.0 * self.enclosed_flux_radial(r) / r

    def a_plus(self, z) -> np.ndarray:
        """a_+ = (i/4) d_zbar h_+ = (i/8) h'(r) e^{i phi}."""
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        phase = np.where(r > 0, z / np.where(r > 0, r, 1.0), 0.0)
        return 0.125j * self.dh(np.where(r > 0, r, 1.0)) * phase * (r > 0)

    def a_minus(self, z) -> np.ndarray:
        """Chart-minus potential from the transition relation."""
        z = np.asarray(z, dtype=complex)
        zb = np.conj(z)
        return 4.0 / zb ** 2 * self.a_plus(-4.0 / z) + 0.5j * self.n / zb

    def a_minus_direct(self, z) -> np.ndarray:
        """a_- = (i/4) d_zbar h_- with h_-(rho) = h_+(4/rho) + 4n log rho.

        Closed form (i/2)(n - F(4/rho)) / rho * e^{i phi}; bounded at 0.
        """
        z = np.asarray(z, dtype=complex)
        rho = np.abs(z)
        outer = float(self.n) - self.enclosed_flux_radial(4.0 / rho)
        return 0.5j * outer / rho * (z / rho)


def _radial_grid(r_min, r_max, nodes):
    return np.geomspace(r_min, r_max, nodes)


def _potential_from_flux(r: np.ndarray, outer: np.ndarray, n: int, tail: float):
    """h(r) = 4 n log r + 4 int_{log r}^inf (n - F) dt.

    Integrating the angular-averaged kernel 4 int log max(r, r') b r' dr'
    by parts gives this form; ``outer`` holds n - F on the grid and ``tail``
    the integral beyond r_max.
    """
    y = outer / r  # integrand in dr
    cum = cumulative_log(y, r)
    from_top = cum[-1] - cum + tail
    if r.size >= 9:
        coarse = cumulative_log(y[::2], r[::2])
        coarse_top = coarse[-1] - coarse + tail
        err = float(np.max(np.abs(coarse_top - from_top[::2])))
    else:
        err = 0.0
    return 4.0 * n * np.log(r) + 4.0 * from_top, err


def build_gauge(gN: FieldProfile, n: int, r_min: float = DEFAULT_R_MIN, r_max: float = DEFAULT_R_MAX,
                nodes: int = DEFAULT_R_NODES, quad_tol: float = 1e-6) -> GaugeData:
    """Gauge for the density gN vol_N of Chern number n."""
    flux = gN.total_flux()
    if abs(flux - n) > FLUX_TOL:
        raise FluxMismatch(f"density has flux {flux!r}, expected Chern number {n}")
    r = _radial_grid(r_min, r_max, nodes)
    theta = radius_to_theta(r)
    enclosed = gN.enclosed_flux(theta)
    outer = n - enclosed
    # beyond r_max: n - F ~ 2 g(pi) / r^2, integrand (n - F)/r
    tail = float(gN(np.array([math.pi]))[0]) / r_max ** 2
    h, err = _potential_from_flux(r, outer, n, tail)
    if not np.all(np.isfinite(h)) or err > quad_tol:
        raise QuadratureFailure(f"radial potential quadrature error {err:.3e} exceeds {quad_tol:.1e}")
    return GaugeData(n=int(n), r=r, h_radial=h, dh_radial=4.0 * enclosed / r, profile=gN,
                     quadrature_error=err)


def build_ring_gauge(n: int, ring_radius: float, r_min: float = DEFAULT_R_MIN,
                     r_max: float = DEFAULT_R_MAX, nodes: int = DEFAULT_R_NODES) -> GaugeData:
    """All flux 2 pi n on the circle |z_+| = ring_radius: h = 4n log max(r, r0)."""
    r = _radial_grid(r_min, r_max, nodes)
    h = 4.0 * n * np.log(np.maximum(r, ring_radius))
    dh = np.where(r >= ring_radius, 4.0 * n / r, 0.0)
    return GaugeData(n=int(n), r=r, h_radial=h, dh_radial=dh, ring_radius=float(ring_radius))


def ring_potential_closed_form(r, n: int, ring_radius: float) -> np.ndarray:
    """(2 Phi / pi) log max(r, r0) with Phi = 2 pi n."""
    phi = 2.0 * math.pi * n
    return 2.0 * phi / math.pi * np.log(np.maximum(np.asarray(r, dtype=float), ring_radius))


def _circle_integral(a_func, radius: float, samples: int) -> float:
    """Counter-clockwise integral of alpha = 2 Re(a dzbar) on |z| = radius."""
    phi = 2.0 * math.pi * np.arange(samples) / samples
    z = radius * np.exp(1j * phi)
    dzbar = np.conj(1j * z)  # d zbar / d phi
    integrand = 2.0 * np.real(a_func(z) * dzbar)
    return float(np.sum(integrand) * 2.0 * math.pi / samples)


def chart_flux_check(gauge: GaugeData, samples: int = 256) -> float:
    """Sum of the circulations of a_+ and a_- on |z| = 2 (equals 2 pi n)."""
    return _circle_integral(gauge.a_plus, 2.0, samples) + _circle_integral(gauge.a_minus, 2.0, samples)


def transition_relation_residual(gauge: GaugeData, samples: int = 64) -> float:
    """Pointwise gap between a_- from the transition rule and from h_-."""
    phi = 2.0 * math.pi * np.arange(samples) / samples
    z = 2.0 * np.exp(1j * phi)
    return float(np.max(np.abs(gauge.a_minus(z) - gauge.a_minus_direct(z))))


def stokes_flux(gauge: GaugeData, panels: int = 256) -> float:
    """Flux through |z| <= 2 in both charts by direct area quadrature.

    In chart + the density is g_N Omega_N^2 dx dy; the chart-minus disc
    covers the other hemisphere with the same density at theta -> pi - theta'.
    Composite Gauss-Legendre in r keeps sharp profile features resolved.
    """
    if gauge.profile is None:
        raise ValueError("ring gauges have no smooth density")
    edges = np.linspace(0.0, 2.0, panels + 1)

    def disc(theta_of_r):
        return _gauss_legendre(
            lambda r: gauge.density(theta_of_r(r)) * conformal_factor(r) ** 2 * r, edges[:-1], edges[1:]).sum()

    north = disc(radius_to_theta)
    south = disc(lambda r: math.pi - radius_to_theta(r))
    return float(2.0 * math.pi * (north + south))


def asymptotic_offset(gauge: GaugeData, r) -> np.ndarray:
    """h_+(r) - 4 n log r; tends to a constant at large r."""
    r = np.asarray(r, dtype=float)
    return gauge.h(r) - 4.0 * gauge.n * np.log(r)


@dataclass(frozen=True, eq=False)
class ChartSpinorField:
    """Spinor section given by closed-form component functions in both charts.

    ``plus`` and ``minus`` map complex chart coordinates to arrays of shape
    (..., 2).  Grids are sampled on demand over polar (r, phi) grids.
    """

    chern: int
    plus: Callable[[np.ndarray], np.ndarray]
    minus: Callable[[np.ndarray], np.ndarray]
    label: str = ""

    def sample(self, chart: str, radii: np.ndarray, angles: np.ndarray) -> np.ndarray:
        rr, pp = np.meshgrid(np.asarray(radii, float), np.asarray(angles, float), indexing="ij")
        z = rr * np.exp(1j * pp)
        func = self.plus if chart == "plus" else self.minus
        return func(z)

    def plus_grid(self, radii, angles) -> np.ndarray:
        return self.sample("plus", radii, angles)

    def minus_grid(self, radii, angles) -> np.ndarray:
        return self.sample("minus", radii, angles)

    def transition_residual(self, radii=None, angles=None) -> float:
        """max |u_-(-4/z) - U_n(z) W(z) u_+(z)| / max |u_+| on 1 <= |z| <= 4."""
        radii = np.linspace(1.0, 4.0, 31) if radii is None else np.asarray(radii)
        angles = np.linspace(0.0, 2 * math.pi, 48, endpoint=False) if angles is None else np.asarray(angles)
        rr, pp = np.meshgrid(radii, angles, indexing="ij")
        z = rr * np.exp(1j * pp)
        up = self.plus(z)
        um = self.minus(-4.0 / z)
        unit = z / np.abs(z)
        scal = np.conj(unit) ** self.chern
        expected = np.stack([scal * unit * up[..., 0], scal * np.conj(unit) * up[..., 1]], axis=-1)
        scale = max(float(np.max(np.abs(up))), 1e-300)
        return float(np.max(np.abs(um - expected)) / scale)
