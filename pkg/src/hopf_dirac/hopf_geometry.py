"""Hopf map, the global frame (u1, u2, n) on S^3 and its Levi-Civita data.

Tangent vectors live in C^2 = R^4.  The frame fields are real-linear in
(z1, z2), so every covariant derivative is computed by exact linear algebra
on the defining maps; finite differences appear only in cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Tuple

import numpy as np

POINT_AT_INFINITY = complex(math.inf, 0.0)

FIELD_NAMES = ("u1", "u2", "n")

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class PauliAlgebra:
    sigma1: np.ndarray = SIGMA1
    sigma2: np.ndarray = SIGMA2
    sigma3: np.ndarray = SIGMA3

    def as_tuple(self):
        return (self.sigma1, self.sigma2, self.sigma3)

    def anticommutator_residual(self) -> float:
        sig = self.as_tuple()
        eye = np.eye(2)
        worst = 0.0
        for i in range(3):
            for j in range(3):
                anti = sig[i] @ sig[j] + sig[j] @ sig[i]
                worst = max(worst, float(np.abs(anti - 2.0 * (i == j) * eye).max()))
        return worst

    def orientation_residual(self) -> float:
        """Distance of i*s1*s2*s3 from -I (positive orientation)."""
        prod = 1j * self.sigma1 @ self.sigma2 @ self.sigma3
        return float(np.abs(prod + np.eye(2)).max())


PAULI = PauliAlgebra()


@dataclass(frozen=True)
class PointS3:
    z1: complex
    z2: complex

    @classmethod
    def normalized(cls, z1: complex, z2: complex) -> "PointS3":
        norm = math.sqrt(abs(z1) ** 2 + abs(z2) ** 2)
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return cls(complex(z1) / norm, complex(z2) / norm)

    def as_pair(self) -> np.ndarray:
        return np.array([self.z1, self.z2], dtype=complex)

    def norm_residual(self) -> float:
        return abs(abs(self.z1) ** 2 + abs(self.z2) ** 2 - 1.0)


def pair_to_real(v: np.ndarray) -> np.ndarray:
    """(w1, w2) in C^2 -> (Re w1, Im w1, Re w2, Im w2)."""
    v = np.asarray(v, dtype=complex)
    return np.stack([v[..., 0].real, v[..., 0].imag, v[..., 1].real, v[..., 1].imag], axis=-1)


def real_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean inner product of R^4 = C^2, i.e. Re<a, b>."""
    return float(np.real(np.vdot(a, b)))


# Each frame field is w -> A w + B conj(w) on C^2; stored as (A, B).
_FIELD_MAPS: Dict[str, Tuple[np.ndarray, np.ndarray]] = {
    "u1": (np.zeros((2, 2), complex), np.array([[0, 1j], [-1j, 0]])),
    "u2": (np.zeros((2, 2), complex), np.array([[0, 1], [-1, 0]], dtype=complex)),
    "n": (np.array([[1j, 0], [0, 1j]]), np.zeros((2, 2), complex)),
}


def field_linear_map(name: str) -> Tuple[np.ndarray, np.ndarray]:
    """(A, B) with field(w) = A w + B conj(w)."""
    a, b = _FIELD_MAPS[name]
    return a.copy(), b.copy()


def field_value(name: str, w: np.ndarray) -> np.ndarray:
    """Evaluate the (linearly extended) frame field at any w in C^2."""
    a, b = _FIELD_MAPS[name]
    w = np.asarray(w, dtype=complex)
    return a @ w + b @ np.conj(w)


@dataclass(frozen=True)
class FrameVectors:
    """The frame at one point as complex pairs; ``real`` gives R^4 vectors."""

    u1: np.ndarray
    u2: np.ndarray
    n: np.ndarray

    def __getitem__(self, name: str) -> np.ndarray:
        return {"u1": self.u1, "u2": self.u2, "n": self.n}[name]

    def real(self) -> Dict[str, np.ndarray]:
        return {k: pair_to_real(self[k]) for k in FIELD_NAMES}

    def gram(self) -> np.ndarray:
        vecs = [self.u1, self.u2, self.n]
        return np.array([[real_inner(a, b) for b in vecs] for a in vecs])


def hopf_project(p: PointS3) -> complex:
    """phi(z1, z2) = 2 z1 / z2, or the point at infinity when z2 = 0."""
    if p.z2 == 0:
        return POINT_AT_INFINITY
    return 2.0 * p.z1 / p.z2


def hopf_project_array(z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
    """Vectorised Hopf map on arrays (no infinity handling)."""
    return 2.0 * np.asarray(z1) / np.asarray(z2)


def frame_at(p: PointS3) -> FrameVectors:
    w = p.as_pair()
    return FrameVectors(*(field_value(k, w) for k in FIELD_NAMES))


def orientation_sign(p: PointS3) -> float:
    """Sign of det[u1, u2, n, v] in R^4; +1 for the outward-normal convention."""
    fr = frame_at(p)
    mat = np.column_stack([pair_to_real(fr.u1), pair_to_real(fr.u2), pair_to_real(fr.n),
                           pair_to_real(p.as_pair())])
    return float(np.sign(np.linalg.det(mat)))


def tangent_projection(p: PointS3, vec: np.ndarray) -> np.ndarray:
    w = p.as_pair()
    return vec - real_inner(w, vec) * w


def ambient_derivative(x_name: str, y_name: str, p: PointS3) -> np.ndarray:
    """D_X Y in C^2: derivative of the linear field Y along X(p)."""
    x_vec = field_value(x_name, p.as_pair())
    return field_value(y_name, x_vec)


def embedded_covariant_derivative(x_name: str, y_name: str, p: PointS3) -> np.ndarray:
    """Levi-Civita derivative of frame field Y along frame field X at p."""
    return tangent_projection(p, ambient_derivative(x_name, y_name, p))


def frame_coefficients(p: PointS3, vec: np.ndarray) -> np.ndarray:
    """Components of a tangent vector in the frame (u1, u2, n)."""
    fr = frame_at(p)
    return np.array([real_inner(fr[k], vec) for k in FIELD_NAMES])


def connection_table(p: PointS3) -> Dict[Tuple[str, str], np.ndarray]:
    """All nine derivatives nabla_X Y expressed in frame coefficients."""
    return {(x, y): frame_coefficients(p, embedded_covariant_derivative(x, y, p))
            for x in FIELD_NAMES for y in FIELD_NAMES}


EXPECTED_CONNECTION = {
    ("n", "u1"): np.array([0.0, 1.0, 0.0]),
    ("n", "u2"): np.array([-1.0, 0.0, 0.0]),
    ("u1", "n"): np.array([0.0, -1.0, 0.0]),
    ("u2", "n"): np.array([1.0, 0.0, 0.0]),
    ("u1", "u2"): np.array([0.0, 0.0, 1.0]),
    ("u2", "u1"): np.array([0.0, 0.0, -1.0]),
    ("n", "n"): np.array([0.0, 0.0, 0.0]),
    ("u1", "u1"): np.array([0.0, 0.0, 0.0]),
    ("u2", "u2"): np.array([0.0, 0.0, 0.0]),
}


def connection_table_residual(points: Iterable[PointS3]) -> float:
    worst = 0.0
    for p in points:
        table = connection_table(p)
        for key, expected in EXPECTED_CONNECTION.items():
            worst = max(worst, float(np.abs(table[key] - expected).max()))
    return worst


def _dnu_values(p: PointS3) -> Tuple[float, float, float]:
    """(nu, *dnu), (u1, *dnu), (u2, *dnu) from the Koszul-type formula."""
    fr = frame_at(p)

    def dnu(a: str, b: str) -> float:
        # d nu(A, B) = (nabla_A n, B) - (nabla_B n, A) for the unit field n
        return (real_inner(embedded_covariant_derivative(a, "n", p), fr[b])
                - real_inner(embedded_covariant_derivative(b, "n", p), fr[a]))

    return dnu("u1", "u2"), dnu("u2", "n"), dnu("n", "u1")


def verify_dnu_identity(sample: List[PointS3]) -> float:
    """Max deviation of (nu, *d nu) from -2 plus the two vanishing components."""
    if not sample:
        raise ValueError("sample must be nonempty")
    worst = 0.0
    for p in sample:
        along, c1, c2 = _dnu_values(p)
        worst = max(worst, abs(along + 2.0), abs(c1), abs(c2))
    return worst


def dnu_value(p: PointS3) -> float:
    return _dnu_values(p)[0]


def _covariant_of_connection_field(x_name: str, y_name: str, z_name: str, p: PointS3) -> np.ndarray:
    """nabla_X (nabla_Y Z) at p, differentiating the field W = nabla_Y Z exactly.

    W(w) = L w - Re<L w, w> w with L w = D_Y Z(w) linear, so its ambient
    derivative along X is available in closed form.
    """
    w = p.as_pair()
    xv = field_value(x_name, w)

    def lin(v):
        return field_value(z_name, field_value(y_name, v))

    lw, lx = lin(w), lin(xv)
    ambient = lx - (real_inner(lx, w) + real_inner(lw, xv)) * w - real_inner(lw, w) * xv
    return tangent_projection(p, ambient)


def lie_bracket(x_name: str, y_name: str, p: PointS3) -> np.ndarray:
    """[X, Y] = D_X Y - D_Y X for the linear frame fields."""
    return ambient_derivative(x_name, y_name, p) - ambient_derivative(y_name, x_name, p)


def _covariant_along_vector(vec: np.ndarray, z_name: str, p: PointS3) -> np.ndarray:
    return tangent_projection(p, field_value(z_name, vec))


def curvature(x_name: str, y_name: str, z_name: str, p: PointS3) -> np.ndarray:
    """R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z."""
    first = _covariant_of_connection_field(x_name, y_name, z_name, p)
    second = _covariant_of_connection_field(y_name, x_name, z_name, p)
    third = _covariant_along_vector(lie_bracket(x_name, y_name, p), z_name, p)
    return first - second - third


def riemann_curvature_table(p: PointS3) -> Dict[Tuple[str, str], np.ndarray]:
    """R(u_i, n) u_j for i in {1, 2}, j in {1, 2, 3}, in frame coefficients.

    Keys are (i-field, j-field) such as ("u1", "n") for R(u1, n) n.
    """
    return {(xi, zj): frame_coefficients(p, curvature(xi, "n", zj, p))
            for xi in ("u1", "u2") for zj in FIELD_NAMES}


EXPECTED_CURVATURE = {
    ("u1", "u1"): np.array([0.0, 0.0, -1.0]),
    ("u1", "u2"): np.array([0.0, 0.0, 0.0]),
    ("u1", "n"): np.array([1.0, 0.0, 0.0]),
    ("u2", "u1"): np.array([0.0, 0.0, 0.0]),
    ("u2", "u2"): np.array([0.0, 0.0, -1.0]),
    ("u2", "n"): np.array([0.0, 1.0, 0.0]),
}


def random_points(count: int, seed: int) -> List[PointS3]:
    """Uniform sample on S^3 from normalized Gaussians (fixed seed)."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((count, 4))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    return [PointS3(complex(a, b), complex(c, d)) for a, b, c, d in raw]


def pushforward_closed_form(p: PointS3) -> Dict[str, complex]:
    """phi_* of u1, u2 and n as complex numbers in the chart."""
    z2 = p.z2
    return {"u1": 2j / z2 ** 2, "u2": 2.0 / z2 ** 2, "n": 0.0j}


def pushforward_fd(p: PointS3, vec: np.ndarray, step: float = 1e-5) -> complex:
    """Richardson-improved centered difference of the Hopf map along vec."""
    w = p.as_pair()

    def cd(h):
        plus = w + h * vec
        minus = w - h * vec
        return (2.0 * plus[0] / plus[1] - 2.0 * minus[0] / minus[1]) / (2.0 * h)

    return (4.0 * cd(step) - cd(2.0 * step)) / 3.0


def horizontal_lift(w: np.ndarray, chart_vector: complex) -> np.ndarray:
    """Horizontal vector at w (in span of u1, u2) projecting to chart_vector.

    Uses phi_*(u2) = 2/z2^2 and phi_*(u1) = i*phi_*(u2); defined for any w
    with z2 != 0 so that it can be differentiated along flows.
    """
    w = np.asarray(w, dtype=complex)
    ratio = chart_vector * w[1] ** 2 / 2.0
    return ratio.imag * field_value("u1", w) + ratio.real * field_value("u2", w)


def bracket_pushforward_residual(points: Iterable[PointS3], step: float = 1e-5) -> float:
    """Max |phi_*([n, e])| for horizontal lifts e of constant chart fields.

    The vertical field n and a lift e of a field on the base are
    phi-related to 0 and to that field, so their bracket projects to 0.
    D_n e is estimated by centered differences along n; D_e n is exact.
    """
    worst = 0.0
    for p in points:
        w = p.as_pair()
        nv = field_value("n", w)
        for chart_vector in (1.0 + 0j, 1j):
            dne = (horizontal_lift(w + step * nv, chart_vector)
                   - horizontal_lift(w - step * nv, chart_vector)) / (2.0 * step)
            e = horizontal_lift(w, chart_vector)
            bracket = dne - field_value("n", e)
            worst = max(worst, abs(pushforward_fd(p, bracket, step)) / max(1.0, abs(chart_vector)))
    return worst


def clifford_matrix(coefficients: np.ndarray) -> np.ndarray:
    """sigma of the one-form with frame components (c1, c2, c3)."""
    c = np.asarray(coefficients)
    return c[0] * SIGMA1 + c[1] * SIGMA2 + c[2] * SIGMA3


def spin_connection_matrices(p: PointS3) -> Dict[str, np.ndarray]:
    """Matrices Gamma(X) with (nabla_X psi)_a = X psi_a + Gamma(X)_ab psi_b.

    Read off from the local formula for a spin^c connection in the spinor
    basis adapted to (e1, e2, e3) = (u1, u2, n), with the U(1) part zero.
    """
    fr = frame_at(p)
    out = {}
    for x in FIELD_NAMES:
        e1e2 = real_inner(fr.u1, embedded_covariant_derivative(x, "u2", p))
        e3e2 = real_inner(fr.n, embedded_covariant_derivative(x, "u2", p))
        e3e1 = real_inner(fr.n, embedded_covariant_derivative(x, "u1", p))
        out[x] = 0.5j * np.array([[e1e2, -e3e2 - 1j * e3e1],
                                  [-e3e2 + 1j * e3e1, -e1e2]])
    return out
