"""Independent variational oracles.

``s3_free_oracle`` diagonalizes the Dirac operator on S^3 (free, or with a
constant field along the fibres) on polynomial spinors in (z1, zbar1, z2,
zbar2).  The frame fields act degree-preservingly with coefficients in
{0, +-1, +-i}, and monomial integrals over S^3 are rational multiples of
2 pi^2, so Gram and operator matrices are assembled exactly in rational
arithmetic.

``s2_constant_field_oracle`` is a Rayleigh-Ritz computation for the 2-D
operator with constant field, per azimuthal sector, with trial functions
sin(theta/2)^alpha cos(theta/2)^beta P_t(cos theta) (P_t Jacobi).  In the
chart variable these are |z|^alpha (1 + |z|^2/4)^(-(alpha+beta)/2) times
polynomials in |z|^2 / (1 + |z|^2/4).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Tuple

import numpy as np
from scipy import integrate, special

from .dirac2d import merge_values
from .errors import DegreeTooLarge, IllConditionedGram, NumericalError
from .hopf_geometry import (FIELD_NAMES, SIGMA1, SIGMA2, SIGMA3, PointS3, field_linear_map,
                            spin_connection_matrices)
from .linalg_core import eigh_generalized

CLOSURE_TOL = 1e-12
MAX_DEGREE = 6
GRAM_COND_LIMIT = 1e12

# complex rationals as (re, im) pairs of Fractions
ZERO = (Fraction(0), Fraction(0))


def _cadd(a, b):
    return (a[0] + b[0], a[1] + b[1])


def _cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _exact(z: complex):
    """Gaussian integer entries of the frame maps and Pauli matrices."""
    re, im = round(z.real), round(z.imag)
    if abs(z - complex(re, im)) > 1e-14:
        raise ValueError(f"{z!r} is not a Gaussian integer")
    return (Fraction(re), Fraction(im))


def _as_complex(a) -> complex:
    return complex(float(a[0]), float(a[1]))


class MomentTable:
    """Integrals of |z1|^(2a) |z2|^(2c) over the unit S^3.

    Values are 2 pi^2 a! c! / (a + c + 1)!; ``ratio`` returns the rational
    factor in front of 2 pi^2.
    """

    VOLUME = 2.0 * math.pi ** 2

    def __init__(self):
        self._cache: Dict[Tuple[int, int], Fraction] = {}

    def ratio(self, a: int, c: int) -> Fraction:
        key = (a, c)
        if key not in self._cache:
            self._cache[key] = Fraction(math.factorial(a) * math.factorial(c), math.factorial(a + c + 1))
        return self._cache[key]

    def __getitem__(self, key: Tuple[int, int]) -> float:
        return self.VOLUME * float(self.ratio(*key))

    def monomial_ratio(self, exps: Tuple[int, int, int, int]) -> Fraction:
        """Integral of z1^e0 zbar1^e1 z2^e2 zbar2^e3 divided by 2 pi^2."""
        e0, e1, e2, e3 = exps
        if e0 != e1 or e2 != e3:
            return Fraction(0)
        return self.ratio(e0, e2)


def moment_by_quadrature(a: int, c: int, nodes: int = 64) -> float:
    """Product quadrature in Hopf coordinates z1 = cos(eta) e^{i x}, z2 = sin(eta) e^{i y}."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    eta = 0.25 * math.pi * (x + 1.0)
    vals = np.cos(eta) ** (2 * a + 1) * np.sin(eta) ** (2 * c + 1)
    return float(4.0 * math.pi ** 2 * 0.25 * math.pi * np.sum(w * vals))


def _monomials(degree: int) -> List[Tuple[int, int, int, int]]:
    if degree < 0:
        return []
    return [m for m in itertools.product(range(degree + 1), repeat=4) if sum(m) == degree]


def _field_action() -> Dict[str, List[Tuple[int, Tuple[Fraction, Fraction], int]]]:
    """Derivation rules X(var) = sum coef * src for the variables (z1, zb1, z2, zb2)."""
    rules = {}
    for name in FIELD_NAMES:
        a, b = field_linear_map(name)
        entries = []
        for row in range(2):
            for col in range(2):
                # X(z_row) = A z_col + B zbar_col ; X(zbar_row) is the conjugate
                if a[row, col] != 0:
                    entries.append((2 * row, _exact(a[row, col]), 2 * col))
                    entries.append((2 * row + 1, _exact(np.conj(a[row, col])), 2 * col + 1))
                if b[row, col] != 0:
                    entries.append((2 * row, _exact(b[row, col]), 2 * col + 1))
                    entries.append((2 * row + 1, _exact(np.conj(b[row, col])), 2 * col))
        rules[name] = entries
    return rules


def _differentiate(rules, mono):
    out: Dict[Tuple[int, ...], Tuple[Fraction, Fraction]] = {}
    for var, coef, src in rules:
        e = mono[var]
        if e == 0:
            continue
        m = list(mono)
        m[var] -= 1
        m[src] += 1
        key = tuple(m)
        out[key] = _cadd(out.get(key, ZERO), _cmul(coef, (Fraction(e), Fraction(0))))
    return out


def connection_term() -> np.ndarray:
    """Constant matrix -i sum_j sigma_j Gamma(e_j) of the free operator in the Hopf frame.

    Gamma is read off the connection table at a sample point; the frame is
    left-invariant so the result does not depend on the point.
    """
    gam = spin_connection_matrices(PointS3(0.6 + 0.0j, 0.8j))
    sig = {"u1": SIGMA1, "u2": SIGMA2, "n": SIGMA3}
    return sum(-1j * sig[k] @ gam[k] for k in FIELD_NAMES)


@dataclass(frozen=True)
class S3OracleResult:
    degree: int
    field_strength: float
    values: np.ndarray
    multiplicities: np.ndarray
    eigenvalues: np.ndarray
    gram: np.ndarray
    closure_residual: float

    def as_pairs(self) -> List[Tuple[float, int]]:
        return [(float(v), int(m)) for v, m in zip(self.values, self.multiplicities)]


def s3_free_oracle(degree: int, field_strength=0, merge_tol: float = 1e-8) -> S3OracleResult:
    """Ritz values of the S^3 Dirac operator on spinors of degree <= ``degree``.

    ``field_strength`` g adds the constant-field term (g/2) sigma_3.  Closure
    is verified by comparing the moment-assembled operator matrix K with
    G C, where C holds the exact coefficients of D applied to each basis
    element in the same basis.
    """
    if degree < 0:
        raise ValueError("degree must be non-negative")
    if degree > MAX_DEGREE:
        raise DegreeTooLarge(f"degree {degree} exceeds the supported maximum {MAX_DEGREE}")
    table = MomentTable()
    rules = _field_action()
    basis = _monomials(degree) + _monomials(degree - 1)
    nb = len(basis)
    index = {m: i for i, m in enumerate(basis)}
    size = 2 * nb
    sig = {"u1": SIGMA1, "u2": SIGMA2, "n": SIGMA3}
    # the connection term has half-integer entries; the field term g/2 is kept exact
    base = connection_term()
    g_half = Fraction(float(field_strength)) / 2
    local_exact = [[_cadd(_cmul((Fraction(1, 2), Fraction(0)), _exact(2 * base[a, b])),
                          (g_half * int(round(SIGMA3[a, b].real)), Fraction(0)))
                    for b in range(2)] for a in range(2)]

    def conj_exps(m):
        return (m[1], m[0], m[3], m[2])

    # coefficients of D applied to basis element (mono j, component b)
    coeffs: Dict[Tuple[int, int], Dict[Tuple[int, int], Tuple[Fraction, Fraction]]] = {}
    for j, mono in enumerate(basis):
        derivs = {name: _differentiate(rules[name], mono) for name in FIELD_NAMES}
        for b in range(2):
            out: Dict[Tuple[int, int], Tuple[Fraction, Fraction]] = {}
            for name in FIELD_NAMES:
                for a in range(2):
                    s = sig[name][a, b]
                    if s == 0:
                        continue
                    factor = _cmul((Fraction(0), Fraction(-1)), _exact(s))
                    for m, cf in derivs[name].items():
                        key = (a, index[m])
                        out[key] = _cadd(out.get(key, ZERO), _cmul(factor, cf))
            for a in range(2):
                if local_exact[a][b] != ZERO:
                    key = (a, j)
                    out[key] = _cadd(out.get(key, ZERO), local_exact[a][b])
            coeffs[(b, j)] = out

    gram_exact = [[table.monomial_ratio(tuple(x + y for x, y in zip(conj_exps(mi), mj))) for mj in basis]
                  for mi in basis]
    gram_scalar = np.array([[float(v) for v in row] for row in gram_exact])
    gram = np.kron(np.eye(2), gram_scalar)
    # K by direct moments of conj(basis) * (D basis)
    k_mat = np.zeros((size, size), dtype=complex)
    c_mat = np.zeros((size, size), dtype=complex)
    for (b, j), out in coeffs.items():
        col = b * nb + j
        for (a, i_out), cf in out.items():
            c_mat[a * nb + i_out, col] = _as_complex(cf)
            mono_out = basis[i_out]
            for i, mi in enumerate(basis):
                ratio = table.monomial_ratio(tuple(x + y for x, y in zip(conj_exps(mi), mono_out)))
                if ratio:
                    k_mat[a * nb + i, col] += _as_complex(_cmul(cf, (ratio, Fraction(0))))
    closure = float(np.linalg.norm(k_mat - gram @ c_mat) / max(np.linalg.norm(k_mat), 1e-300))
    if closure > CLOSURE_TOL:
        raise NumericalError(f"degree {degree} basis is not invariant under the operator "
                             f"(closure residual {closure:.2e} > {CLOSURE_TOL:.0e}); Ritz values are not exact")
    dec = eigh_generalized(0.5 * (k_mat + k_mat.conj().T), gram, want_vectors=False)
    values, mults = merge_values(dec.eigenvalues, merge_tol)
    return S3OracleResult(degree=degree, field_strength=float(field_strength), values=values,
                          multiplicities=mults, eigenvalues=dec.eigenvalues,
                          gram=MomentTable.VOLUME * gram, closure_residual=closure)


def s3_closed_form(energy_max: float) -> List[Tuple[float, int]]:
    """Free spectrum +-(3/2 + j) with multiplicity (j+1)(j+2) inside the window."""
    out = []
    j = 0
    while 1.5 + j <= energy_max + 1e-12:
        mult = (j + 1) * (j + 2)
        out.extend([(-(1.5 + j), mult), (1.5 + j, mult)])
        j += 1
    return sorted(out)


# 2-D constant-field oracle ------------------------------------------------

@dataclass(frozen=True)
class S2OracleResult:
    n: int
    basis_size: int
    positive: List[Tuple[float, int]]
    zero_count: int
    smallest_ritz: float
    sector_ritz: Dict[int, np.ndarray]
    gram_condition: float


def _trial_values(alpha: float, beta: float, a: float, b: float, size: int, theta: np.ndarray):
    """Values and theta-derivatives of s^alpha c^beta P_t^{(a,b)}(cos theta), t < size."""
    s, c = np.sin(theta / 2.0), np.cos(theta / 2.0)
    x = np.cos(theta)
    env = s ** alpha * c ** beta
    denv = env * (0.5 * alpha * c / s - 0.5 * beta * s / c)
    vals = np.empty((size,) + theta.shape)
    ders = np.empty((size,) + theta.shape)
    for t in range(size):
        p = special.eval_jacobi(t, a, b, x)
        dp = 0.5 * (t + a + b + 1) * special.eval_jacobi(t - 1, a + 1, b + 1, x) if t > 0 else 0.0 * x
        vals[t] = env * p
        ders[t] = denv * p - env * dp * np.sin(theta)
    return vals, ders


def _ritz_sector(n: int, j: int, size: int, upper: bool, epsabs: float = 1e-13):
    """Ritz values of B^dagger B (upper) or B B^dagger (lower) in sector j.

    B p = -2 (d - W) p maps upper to lower; its adjoint is 2 (d + W).
    Returns the squared-eigenvalue Ritz values and the Gram condition number.
    """
    kappa = j + 0.5
    if upper:
        alpha, beta = abs(j) + 0.5, abs(j + 1 - n) + 0.5
        sign = -1.0
    else:
        alpha, beta = abs(j + 1) + 0.5, abs(j - n) + 0.5
        sign = 1.0
    a, b = alpha - 0.5, beta - 0.5

    def integrand(theta):
        th = np.array([theta])
        vals, ders = _trial_values(alpha, beta, a, b, size, th)
        w = (kappa - n * np.sin(th / 2.0) ** 2) / np.sin(th)
        image = 2.0 * (ders + sign * w * vals)
        v = vals[:, 0]
        im = image[:, 0]
        return np.concatenate([np.outer(v, v).ravel(), np.outer(im, im).ravel()])

    res, _ = integrate.quad_vec(integrand, 0.0, math.pi, epsabs=epsabs, epsrel=1e-12, limit=400)
    gram = res[: size * size].reshape(size, size)
    stiff = res[size * size:].reshape(size, size)
    scale = 1.0 / np.sqrt(np.diag(gram))
    gram = gram * np.outer(scale, scale)
    stiff = stiff * np.outer(scale, scale)
    cond = float(np.linalg.cond(gram))
    if cond > GRAM_COND_LIMIT:
        raise IllConditionedGram(f"sector {j}: trial Gram condition number {cond:.2e}")
    dec = eigh_generalized(0.5 * (stiff + stiff.T), gram, want_vectors=False)
    return dec.eigenvalues, cond


def beta_moment_check(alpha: float, beta: float) -> float:
    """|quadrature - closed form| for int_0^pi s^(2 alpha) c^(2 beta) dtheta = B(alpha + 1/2, beta + 1/2)."""
    val, _ = integrate.quad(lambda t: np.sin(t / 2) ** (2 * alpha) * np.cos(t / 2) ** (2 * beta), 0.0, math.pi,
                            epsabs=1e-14, epsrel=1e-13)
    return abs(val - special.beta(alpha + 0.5, beta + 0.5))


def s2_constant_field_oracle(n: int, basis_size: int = 30, levels: int = 5,
                             zero_threshold: float = 1e-8) -> S2OracleResult:
    """Lowest positive eigenvalues (with multiplicities) for the constant field of Chern number n."""
    if abs(n) > 4:
        raise ValueError("the constant-field oracle supports |n| <= 4")
    if basis_size < 1:
        raise ValueError("basis_size must be positive")
    span = abs(n) + levels + 1
    squares: List[float] = []
    zero_count = 0
    smallest = math.inf
    sector_ritz = {}
    worst_cond = 1.0
    for j in range(-span, span + 1):
        up, c1 = _ritz_sector(n, j, basis_size, True)
        lo, c2 = _ritz_sector(n, j, basis_size, False)
        worst_cond = max(worst_cond, c1, c2)
        ritz = np.sqrt(np.maximum(up, 0.0))
        sector_ritz[j] = ritz
        smallest = min(smallest, float(ritz.min()), float(np.sqrt(max(lo.min(), 0.0))))
        zero_count += int(np.sum(ritz < zero_threshold)) + int(np.sum(np.sqrt(np.maximum(lo, 0.0)) < zero_threshold))
        # the nonzero spectra of B^dagger B and B B^dagger coincide; keep the upper one
        squares.extend(float(v) for v in ritz if v >= zero_threshold)
    values, mults = merge_values(np.array(squares), tol=1e-6)
    positive = [(float(v), int(m)) for v, m in zip(values, mults)][:levels]
    return S2OracleResult(n=n, basis_size=basis_size, positive=positive, zero_count=zero_count,
                          smallest_ritz=smallest, sector_ritz=sector_ritz, gram_condition=worst_cond)


def s2_closed_form(n: int, levels: int = 5) -> List[Tuple[float, int]]:
    """2 sqrt(p (p + |n|)) with multiplicity |n| + 2p, p = 1, 2, ..."""
    return [(2.0 * math.sqrt(p * (p + abs(n))), abs(n) + 2 * p) for p in range(1, levels + 1)]
