"""Transfer of S^3 kernel elements to zero modes on R^3.

Inverse stereographic projection tau: R^3 -> S^3 subset R^4 = C^2,
    tau(x) = ((1 - |x|^2), 2x) / (1 + |x|^2),  (z1, z2) = (X0 + i X3, X2 + i X1),
is conformal with factor 2 / (1 + |x|^2).  Spinors on S^3 are written in the
global frame (u1, u2, n); on R^3 in the Cartesian frame.  At each x the two
orthonormal frames differ by the rotation R[j, i] = <e_j, tau_* d_i> / |tau_* d_i|
and spinor components by the SU(2) element V covering it (taken on its
smooth branch), so that

    psi(x) = Omega(x) V(x) xi(tau(x)),   Omega(x) = 1 / (1 + |x|^2).

For a field of constant strength g along the fibres the connection one-form
is -(g/2) nu, whose pull-back gives the vector potential on R^3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import HypothesisViolation, NonConvergentNorm
from .hopf_geometry import SIGMA1, SIGMA2, SIGMA3, PointS3, field_value
from .linalg_core import central_first_derivative_stencil, simpson_log

PAULI = np.stack([SIGMA1, SIGMA2, SIGMA3])
REMOVED_POINT = PointS3(-1.0 + 0j, 0j)

SpinorField = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _embed(x: np.ndarray) -> np.ndarray:
    """R^3 points (..., 3) -> R^4 points (..., 4)."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    den = 1.0 + r2
    return np.concatenate([((1.0 - r2) / den)[..., None], 2.0 * x / den[..., None]], axis=-1)


def _real4_to_pair(X: np.ndarray) -> np.ndarray:
    return np.stack([X[..., 0] + 1j * X[..., 3], X[..., 2] + 1j * X[..., 1]], axis=-1)


def stereographic_pullback_array(x: np.ndarray) -> np.ndarray:
    """(..., 3) real -> (..., 2) complex points of S^3."""
    return _real4_to_pair(_embed(x))


def stereographic_pullback(x: Sequence[float]) -> PointS3:
    z = stereographic_pullback_array(np.asarray(x, dtype=float))
    return PointS3(complex(z[0]), complex(z[1]))


def stereographic_forward(p: PointS3) -> np.ndarray:
    """Inverse of the pull-back; undefined at the removed point (-1, 0)."""
    x0, x3 = p.z1.real, p.z1.imag
    x2, x1 = p.z2.real, p.z2.imag
    den = 1.0 + x0
    if den == 0.0:
        raise ValueError("the removed point has no image in R^3")
    return np.array([x1, x2, x3]) / den


def pushforward_columns(x: np.ndarray) -> np.ndarray:
    """tau_* d_i as complex pairs, shape (..., 3, 2)."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)[..., None]
    den = 1.0 + r2
    eye = np.eye(3)
    # d/dx_i of (1 - r2)/den = -4 x_i / den^2; of 2 x_k / den = 2 delta_ik / den - 4 x_k x_i / den^2
    d0 = -4.0 * x / den ** 2
    dv = 2.0 * eye / den[..., None] - 4.0 * x[..., :, None] * x[..., None, :] / den[..., None] ** 2
    cols = np.concatenate([d0[..., :, None], dv], axis=-1)  # (..., i, 4)
    return _real4_to_pair(cols)


def _frame_pairs(z: np.ndarray) -> np.ndarray:
    """(..., 3, 2): the frame (u1, u2, n) at S^3 points z."""
    zt = np.moveaxis(z, -1, 0)
    return np.stack([np.moveaxis(field_value(k, zt.reshape(2, -1)).reshape(zt.shape), 0, -1)
                     for k in ("u1", "u2", "n")], axis=-2)


def _rinner(a, b):
    return np.real(np.sum(np.conj(a) * b, axis=-1))


def frame_rotation(x: np.ndarray):
    """Rotation R[j, i] = <e_j, tau_* d_i> / |tau_* d_i| and the conformal factor 2/(1+|x|^2)."""
    x = np.asarray(x, dtype=float)
    z = stereographic_pullback_array(x)
    frame = _frame_pairs(z)  # (..., j, 2)
    cols = pushforward_columns(x)  # (..., i, 2)
    m = _rinner(frame[..., :, None, :], cols[..., None, :, :])
    scale = 2.0 / (1.0 + np.sum(x * x, axis=-1))
    return m / scale[..., None, None], scale


def spin_rotation(rot: np.ndarray) -> np.ndarray:
    """SU(2) element V with V sigma_k V^dagger = sum_i rot[i, k] sigma_i.

    The unit quaternion of ``rot`` is extracted with Shepperd's branch choice
    and the sign fixed by a non-negative scalar part.
    """
    rot = np.asarray(rot, dtype=float)
    shape = rot.shape[:-2]
    r = rot.reshape(-1, 3, 3)
    out = np.empty((r.shape[0], 2, 2), dtype=complex)
    for idx, mat in enumerate(r):
        tr = np.trace(mat)
        diag = np.diag(mat)
        choice = int(np.argmax([tr, *diag]))
        if choice == 0:
            w = 0.5 * math.sqrt(max(1.0 + tr, 0.0))
            q = np.array([mat[2, 1] - mat[1, 2], mat[0, 2] - mat[2, 0], mat[1, 0] - mat[0, 1]]) / (4.0 * w)
        else:
            i = choice - 1
            j, k = (i + 1) % 3, (i + 2) % 3
            qi = 0.5 * math.sqrt(max(1.0 + mat[i, i] - mat[j, j] - mat[k, k], 0.0))
            q = np.empty(3)
            q[i] = qi
            q[j] = (mat[j, i] + mat[i, j]) / (4.0 * qi)
            q[k] = (mat[k, i] + mat[i, k]) / (4.0 * qi)
            w = (mat[k, j] - mat[j, k]) / (4.0 * qi)
        if w < 0:
            w, q = -w, -q
        out[idx] = w * np.eye(2) - 1j * np.einsum("k,kab->ab", q, PAULI)
    return out.reshape(shape + (2, 2))


def spin_frame(x: np.ndarray) -> np.ndarray:
    """Smooth SU(2) lift of the frame rotation: (I - i sigma.x) / sqrt(1 + |x|^2) times (-i sigma_3).

    ``spin_rotation`` determines the lift only up to sign and its sign choice
    jumps across surfaces where the rotation angle is pi; this closed form is
    the continuous branch through V(0) = -i sigma_3 (checked against
    ``spin_rotation`` in ``spin_frame_residual``).
    """
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    eye = np.broadcast_to(np.eye(2, dtype=complex), x.shape[:-1] + (2, 2))
    lift = (eye - 1j * np.einsum("...k,kab->...ab", x, PAULI)) / np.sqrt(1.0 + r2)[..., None, None]
    return lift @ (-1j * SIGMA3)


def spin_frame_residual(x: np.ndarray) -> float:
    """max | V sigma_k V^dagger - sum_i R[k, i] sigma_i | for the smooth lift V."""
    rot, _ = frame_rotation(x)
    v = spin_frame(x)
    worst = 0.0
    for k in range(3):
        lhs = v @ PAULI[k] @ np.conj(np.swapaxes(v, -1, -2))
        rhs = np.einsum("...i,iab->...ab", rot[..., k, :], PAULI)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def conformal_weight(x: np.ndarray) -> np.ndarray:
    """Omega(x) = 1 / (1 + |x|^2)."""
    return 1.0 / (1.0 + np.sum(np.asarray(x, dtype=float) ** 2, axis=-1))


def transferred_spinor(xi: SpinorField, x: np.ndarray) -> np.ndarray:
    """psi(x) = Omega(x) V(x) xi(tau(x)) for points of shape (..., 3)."""
    x = np.asarray(x, dtype=float)
    z = stereographic_pullback_array(x)
    v = spin_frame(x)
    vals = xi(z[..., 0], z[..., 1])
    return conformal_weight(x)[..., None] * np.einsum("...ab,...b->...a", v, vals)


def vector_potential(x: np.ndarray, g: float) -> np.ndarray:
    """A_i(x) = alpha(tau_* d_i) with alpha = -(g/2) nu (constant field strength g)."""
    x = np.asarray(x, dtype=float)
    z = stereographic_pullback_array(x)
    n_vec = _frame_pairs(z)[..., 2, :]
    cols = pushforward_columns(x)
    return -0.5 * g * _rinner(n_vec[..., None, :], cols)


def _derivatives(func, x: np.ndarray, h: float, accuracy: int = 4) -> List[np.ndarray]:
    offsets, weights = central_first_derivative_stencil(accuracy)
    out = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        acc = 0.0
        for o, w in zip(offsets, weights):
            if w != 0.0:
                acc = acc + w * func(x + o * e)
        out.append(acc / h)
    return out


def magnetic_field(x: np.ndarray, g: float, h: float = 1e-3) -> np.ndarray:
    """B = curl A by fourth-order differences; shape (..., 3)."""
    d = _derivatives(lambda y: vector_potential(y, g), np.asarray(x, dtype=float), h)
    return np.stack([d[1][..., 2] - d[2][..., 1], d[2][..., 0] - d[0][..., 2], d[0][..., 1] - d[1][..., 0]],
                    axis=-1)


def dirac_r3_apply(psi: Callable[[np.ndarray], np.ndarray], potential: Callable[[np.ndarray], np.ndarray],
                   x: np.ndarray, h: float) -> np.ndarray:
    """sigma . (-i grad - A) psi at points x by fourth-order central differences."""
    x = np.asarray(x, dtype=float)
    grads = _derivatives(psi, x, h)
    vals = psi(x)
    a = potential(x)
    out = np.zeros_like(vals, dtype=complex)
    for i in range(3):
        out += np.einsum("ab,...b->...a", PAULI[i], -1j * grads[i] - a[..., i, None] * vals)
    return out


# S^3 side ---------------------------------------------------------------

def s3_dirac_apply(xi: SpinorField, g: float, z: np.ndarray, h: float = 1e-3) -> np.ndarray:
    """D_M xi = -i sum sigma_j e_j(xi) - 3/2 xi + (g/2) sigma_3 xi at S^3 points z (..., 2).

    e_j(xi) is the derivative along the linear frame field, taken by
    fourth-order differences of the ambient polynomial extension of xi.
    """
    z = np.asarray(z, dtype=complex)
    offsets, weights = central_first_derivative_stencil(4)
    vals = xi(z[..., 0], z[..., 1])
    out = -1.5 * vals + 0.5 * g * np.einsum("ab,...b->...a", SIGMA3, vals)
    frame = _frame_pairs(z)
    for j in range(3):
        acc = 0.0
        for o, w in zip(offsets, weights):
            if w != 0.0:
                p = z + o * h * frame[..., j, :]
                acc = acc + w * xi(p[..., 0], p[..., 1])
        out = out - 1j * np.einsum("ab,...b->...a", PAULI[j], acc / h)
    return out


def constant_field_kernel(g: float) -> List[SpinorField]:
    """Kernel of D_M for constant g = 2m + 1, m >= 1: (f, 0) with f of degree m-1 in (zbar1, zbar2).

    Other constant strengths either have a different kernel structure or no
    kernel; they are rejected.
    """
    m2 = g - 1.0
    if m2 <= 0 or abs(m2 / 2 - round(m2 / 2)) > 1e-12:
        raise HypothesisViolation("closed-form kernel needs g = 2m + 1 with m >= 1")
    m = int(round(m2 / 2))
    modes = []
    for a in range(m):
        def mode(z1, z2, a=a):
            f = np.conj(z1) ** a * np.conj(z2) ** (m - 1 - a)
            return np.stack([f, np.zeros_like(f)], axis=-1)
        modes.append(mode)
    return modes


def random_s3_points(count: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((count, 4))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return np.stack([v[:, 0] + 1j * v[:, 1], v[:, 2] + 1j * v[:, 3]], axis=-1)


def s3_kernel_residual(xi: SpinorField, g: float, count: int = 200, seed: int = 0) -> float:
    z = random_s3_points(count, seed)
    res = s3_dirac_apply(xi, g, z)
    return float(np.max(np.linalg.norm(res, axis=-1)) / np.max(np.linalg.norm(xi(z[:, 0], z[:, 1]), axis=-1)))


# R^3 sampling -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SphericalGrid:
    radii: np.ndarray
    cos_polar: np.ndarray
    azimuth: np.ndarray
    angular_weights: np.ndarray

    @classmethod
    def build(cls, radius_max: float = 1e3, radius_min: float = 1e-3, radial: int = 801,
              polar: int = 16, azimuthal: int = 24) -> "SphericalGrid":
        if radial % 2 == 0:
            radial += 1
        x, w = np.polynomial.legendre.leggauss(polar)
        phi = 2.0 * math.pi * np.arange(azimuthal) / azimuthal
        ang_w = np.outer(w, np.full(azimuthal, 2.0 * math.pi / azimuthal))
        return cls(np.geomspace(radius_min, radius_max, radial), x, phi, ang_w)

    def points(self) -> np.ndarray:
        r = self.radii[:, None, None]
        ct = self.cos_polar[None, :, None]
        st = np.sqrt(1.0 - ct ** 2)
        ph = self.azimuth[None, None, :]
        return np.stack(np.broadcast_arrays(r * st * np.cos(ph), r * st * np.sin(ph), r * ct), axis=-1)


@dataclass(frozen=True, eq=False)
class R3SpinorSample:
    """Spinor values on a spherical grid with L^2 quadrature data."""

    grid: SphericalGrid
    points: np.ndarray
    values: np.ndarray

    def shell_density(self) -> np.ndarray:
        """Angular integral of |psi|^2 on each radius."""
        dens = np.sum(np.abs(self.values) ** 2, axis=-1)
        return np.sum(dens * self.grid.angular_weights[None], axis=(1, 2))

    def inner_products(self, other: "R3SpinorSample") -> complex:
        dens = np.sum(np.conj(self.values) * other.values, axis=-1)
        shell = np.sum(dens * self.grid.angular_weights[None], axis=(1, 2))
        r = self.grid.radii
        re = simpson_log(np.real(shell) * r ** 2, r).value
        im = simpson_log(np.imag(shell) * r ** 2, r).value
        return complex(re, im)


@dataclass(frozen=True)
class NormReport:
    truncated: float
    tail: float
    completed: float
    decay_power: float
    radius: float


def transfer_zero_mode(xi: SpinorField, grid: Optional[SphericalGrid] = None, g: Optional[float] = None,
                       kernel_tol: float = 1e-8) -> R3SpinorSample:
    """Sample psi = Omega V xi(tau) on a spherical grid.

    When ``g`` is given the S^3 kernel residual of xi is checked first.
    """
    if g is not None:
        res = s3_kernel_residual(xi, g)
        if res > kernel_tol:
            raise HypothesisViolation(f"S^3 kernel residual {res:.2e} exceeds {kernel_tol:.1e}")
    grid = SphericalGrid.build() if grid is None else grid
    pts = grid.points()
    return R3SpinorSample(grid=grid, points=pts, values=transferred_spinor(xi, pts))


def l2_norm(sample: R3SpinorSample, radius: Optional[float] = None, fit_decades: float = 1.0) -> NormReport:
    """Squared L^2 norm inside ``radius`` plus a fitted power-law tail beyond it.

    The shell density is fitted as C r^(-p) over the last ``fit_decades``
    decades inside the radius; the tail int_R^inf C r^(2-p) dr needs p > 3.
    """
    r = sample.grid.radii
    shell = sample.shell_density()
    radius = r[-1] if radius is None else radius
    keep = r <= radius * (1 + 1e-12)
    rk, sk = r[keep], shell[keep]
    if rk.size % 2 == 0:
        rk, sk = rk[1:], sk[1:]
    inner_ball = shell[0] / (4 * math.pi) * 4.0 / 3.0 * math.pi * r[0] ** 3 if shell[0] > 0 else 0.0
    truncated = simpson_log(sk * rk ** 2, rk).value + inner_ball
    fit = rk >= rk[-1] / 10 ** fit_decades
    slope, intercept = np.polyfit(np.log(rk[fit]), np.log(np.maximum(sk[fit], 1e-300)), 1)
    power = -slope
    if power <= 3.0 + 1e-6:
        raise NonConvergentNorm(f"shell density decays like r^-{power:.3f}; the norm diverges")
    coef = math.exp(intercept)
    R = rk[-1]
    tail = coef * R ** (3.0 - power) / (power - 3.0)
    return NormReport(truncated=float(truncated), tail=float(tail), completed=float(truncated + tail),
                      decay_power=float(power), radius=float(R))


def norm_stability(sample: R3SpinorSample, radii: Tuple[float, float] = (1e2, 1e3)) -> Tuple[float, float]:
    """Relative change of the completed and of the truncated norm between two radii."""
    a = l2_norm(sample, radii[0])
    b = l2_norm(sample, radii[1])
    if b.truncated > a.truncated * (1 + 1e-2) and b.completed > a.completed * (1 + 1e-2):
        raise NonConvergentNorm("the L^2 norm keeps growing with the domain radius")
    return abs(b.completed - a.completed) / b.completed, abs(b.truncated - a.truncated) / b.truncated


def modulus_profile_deviation(sample: R3SpinorSample) -> float:
    """max | |psi| (1 + |x|^2) / mean - 1 | over the sample."""
    r2 = np.sum(sample.points ** 2, axis=-1)
    prof = np.linalg.norm(sample.values, axis=-1) * (1.0 + r2)
    return float(np.max(np.abs(prof / np.mean(prof) - 1.0)))


def r3_dirac_residual(xi: SpinorField, g: float, h: float = 1e-2, radius: float = 20.0,
                      grid: Optional[SphericalGrid] = None) -> float:
    """Relative L^2 residual |D psi| / |psi| of the transferred spinor inside ``radius``."""
    grid = SphericalGrid.build(radius_max=radius, radius_min=1e-2, radial=201, polar=8, azimuthal=12) \
        if grid is None else grid
    pts = grid.points()
    res = dirac_r3_apply(lambda y: transferred_spinor(xi, y), lambda y: vector_potential(y, g), pts, h)
    vals = transferred_spinor(xi, pts)
    r = grid.radii

    def integrate(f):
        shell = np.sum(np.sum(np.abs(f) ** 2, axis=-1) * grid.angular_weights[None], axis=(1, 2))
        return simpson_log(shell * r ** 2, r).value

    return math.sqrt(integrate(res) / integrate(vals))


def transferred_gram(samples: Sequence[R3SpinorSample]) -> np.ndarray:
    size = len(samples)
    gram = np.zeros((size, size), dtype=complex)
    for i in range(size):
        for k in range(size):
            gram[i, k] = samples[i].inner_products(samples[k])
    return gram


def conformal_law_residual(xi: SpinorField, g: float, count: int = 50, seed: int = 1,
                           h: float = 1e-3) -> float:
    """Relative gap between D_R3 psi and 2 Omega^2 V (D_M xi)(tau) for a generic spinor xi.

    With psi = Omega V xi(tau) and the true conformal factor 2 Omega, the
    3-D law D_R3 (2 Omega V xi) = (2 Omega)^2 V D_M xi gives the identity.
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.5, 1.5, size=(count, 3))
    lhs = dirac_r3_apply(lambda y: transferred_spinor(xi, y), lambda y: vector_potential(y, g), x, h)
    z = stereographic_pullback_array(x)
    v = spin_frame(x)
    rhs = 2.0 * conformal_weight(x)[..., None] ** 2 * np.einsum("...ab,...b->...a", v, s3_dirac_apply(xi, g, z))
    return float(np.max(np.linalg.norm(lhs - rhs, axis=-1)) / np.max(np.linalg.norm(rhs, axis=-1)))
