"""Dense Hermitian eigensolvers, quadrature on log grids and FD stencils.

The native eigensolver is a textbook Householder reduction to real
tridiagonal form followed by implicit-shift QL.  A LAPACK backend (through
numpy/scipy) is available for the large tridiagonal sector problems, and
the two are cross-checked in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.integrate
import scipy.linalg

from .errors import NoConvergence, NotPositiveDefinite

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class HermitianMatrix:
    """Complex Hermitian matrix stored as its packed upper triangle.

    Entries are kept row by row: (0,0), (0,1), ..., (0,n-1), (1,1), ...
    The lower triangle is never stored, so Hermiticity holds by storage.
    """

    order: int
    packed: np.ndarray

    def __post_init__(self):
        expected = self.order * (self.order + 1) // 2
        if self.order < 1 or self.packed.shape != (expected,):
            raise ValueError(f"packed storage of length {expected} required for order {self.order}")

    @classmethod
    def from_dense(cls, a: np.ndarray) -> "HermitianMatrix":
        a = np.asarray(a, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("square matrix required")
        iu = np.triu_indices(a.shape[0])
        packed = a[iu].copy()
        packed[iu[0] == iu[1]] = packed[iu[0] == iu[1]].real
        return cls(a.shape[0], packed)

    def to_dense(self) -> np.ndarray:
        n = self.order
        out = np.zeros((n, n), dtype=complex)
        iu = np.triu_indices(n)
        out[iu] = self.packed
        out[(iu[1], iu[0])] = np.conj(self.packed)
        return out

    def frobenius_norm(self) -> float:
        d = self.to_dense()
        return float(np.sqrt(math.fsum(np.abs(d.ravel()) ** 2)))


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: Optional[np.ndarray]
    residual_bound: float


def _as_dense(a) -> np.ndarray:
    if isinstance(a, HermitianMatrix):
        return a.to_dense()
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("square matrix required")
    return a.astype(complex)


def householder_tridiagonalize(a: np.ndarray, want_q: bool = True):
    """Reduce a Hermitian matrix to real symmetric tridiagonal form.

    Returns (d, e, q) with a = q @ T @ q^H, T having diagonal d and
    off-diagonal e (both real, e >= 0).
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    q = np.eye(n, dtype=complex) if want_q else None
    sub = np.zeros(max(n - 1, 0), dtype=complex)
    for k in range(n - 2):
        x = a[k + 1:, k].copy()
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            sub[k] = 0.0
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        alpha = -phase * xnorm
        v = x
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            sub[k] = alpha
            continue
        v /= vnorm
        block = a[k + 1:, k + 1:]
        p = block @ v
        kappa = np.vdot(v, p).real
        w = p - kappa * v
        block -= 2.0 * (np.outer(v, np.conj(w)) + np.outer(w, np.conj(v)))
        a[k + 1:, k + 1:] = block
        a[k + 1:, k] = 0.0
        a[k, k + 1:] = 0.0
        sub[k] = alpha
        if want_q:
            qs = q[:, k + 1:]
            q[:, k + 1:] = qs - 2.0 * np.outer(qs @ v, np.conj(v))
    if n >= 2:
        sub[n - 2] = a[n - 1, n - 2]
    d = np.real(np.diag(a)).copy()
    # diagonal phase scaling turns the complex off-diagonal into |e|
    e = np.abs(sub)
    if want_q and n >= 2:
        scale = np.ones(n, dtype=complex)
        for k in range(n - 1):
            ph = sub[k] / abs(sub[k]) if sub[k] != 0 else 1.0
            scale[k + 1] = scale[k] * ph
        q = q * scale[None, :]
    return d, e, q


def tridiagonal_ql(d: np.ndarray, e: np.ndarray, z: Optional[np.ndarray] = None,
                   max_iter_factor: int = 30):
    """Implicit-shift QL on a real symmetric tridiagonal matrix.

    ``z`` (if given) is updated in place by the accumulated rotations, so
    passing the Householder basis yields eigenvectors of the original matrix.
    """
    d = np.array(d, dtype=float)
    n = d.size
    ee = np.zeros(n)
    ee[: n - 1] = e
    budget = max_iter_factor * n
    spent = 0
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(ee[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            spent += 1
            if it > max_iter_factor or spent > budget:
                raise NoConvergence(f"QL iteration did not converge for eigenvalue {l}")
            g = (d[l + 1] - d[l]) / (2.0 * ee[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + ee[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * ee[i]
                b = c * ee[i]
                r = math.hypot(f, g)
                ee[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    ee[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if z is not None:
                    zi1 = z[:, i + 1].copy()
                    z[:, i + 1] = s * z[:, i] + c * zi1
                    z[:, i] = c * z[:, i] - s * zi1
                i -= 1
            if underflow:
                continue
            d[l] -= p
            ee[l] = g
            ee[m] = 0.0
    return d, z


def eigh(a, want_vectors: bool = True, backend: str = "native") -> EigenDecomposition:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending."""
    dense = _as_dense(a)
    n = dense.shape[0]
    if n < 1:
        raise ValueError("order must be at least 1")
    if backend == "lapack":
        if want_vectors:
            w, v = np.linalg.eigh(dense)
        else:
            w, v = np.linalg.eigvalsh(dense), None
    elif backend == "native":
        d, e, q = householder_tridiagonalize(dense, want_q=want_vectors)
        w, v = tridiagonal_ql(d, e, q)
        order = np.argsort(w, kind="stable")
        w = w[order]
        v = v[:, order] if v is not None else None
    else:
        raise ValueError(f"unknown backend {backend!r}")
    scale = max(float(np.max(np.abs(w))), np.finfo(float).tiny)
    if v is not None:
        res = np.linalg.norm(dense @ v - v * w[None, :], axis=0)
        bound = float(res.max() / scale)
    else:
        bound = 50.0 * EPS * n
    return EigenDecomposition(np.asarray(w, dtype=float), v, bound)


def eigh_generalized(a, b, want_vectors: bool = True, backend: str = "native") -> EigenDecomposition:
    """Solve A v = lambda B v for Hermitian A and Hermitian positive-definite B."""
    da, db = _as_dense(a), _as_dense(b)
    try:
        low = np.linalg.cholesky(db)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    tmp = scipy.linalg.solve_triangular(low, da, lower=True)
    c = scipy.linalg.solve_triangular(low, tmp.conj().T, lower=True).conj().T
    c = 0.5 * (c + c.conj().T)
    inner = eigh(c, want_vectors=want_vectors, backend=backend)
    vecs = None
    bound = inner.residual_bound
    if want_vectors:
        vecs = scipy.linalg.solve_triangular(low.conj().T, inner.eigenvectors, lower=False)
        res = np.linalg.norm(da @ vecs - (db @ vecs) * inner.eigenvalues[None, :], axis=0)
        norm = np.linalg.norm(da, 2) + np.linalg.norm(db, 2) * np.max(np.abs(inner.eigenvalues))
        bound = float(res.max() / max(norm * np.max(np.linalg.norm(vecs, axis=0)), 1e-300))
    return EigenDecomposition(inner.eigenvalues, vecs, bound)


def _sturm_count(d: np.ndarray, e2: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Number of eigenvalues strictly below each entry of x."""
    count = np.zeros(x.shape, dtype=int)
    q = d[0] - x
    tiny = np.finfo(float).tiny
    count += q < 0
    with np.errstate(over="ignore", divide="ignore"):  # a tiny pivot sends q to -inf, which counts correctly
        for i in range(1, d.size):
            q = np.where(q == 0.0, tiny, q)
            q = d[i] - x - e2[i - 1] / q
            count += q < 0
    return count


def eigh_tridiagonal(d: np.ndarray, e: np.ndarray, window: Optional[Tuple[float, float]] = None,
                     want_vectors: bool = False, backend: str = "lapack"):
    """Eigenpairs of a real symmetric tridiagonal matrix inside (lo, hi].

    The 'lapack' backend calls the bisection/inverse-iteration driver;
    the 'native' backend uses Sturm bisection plus inverse iteration and is
    meant for cross-checking on moderate sizes.
    """
    d = np.asarray(d, dtype=float)
    e = np.asarray(e, dtype=float)
    if backend == "lapack":
        kwargs = {}
        if window is not None:
            kwargs = dict(select="v", select_range=window)
        if want_vectors:
            w, v = scipy.linalg.eigh_tridiagonal(d, e, **kwargs)
            return w, v
        w = scipy.linalg.eigh_tridiagonal(d, e, eigvals_only=True, **kwargs)
        return w, None
    if backend != "native":
        raise ValueError(f"unknown backend {backend!r}")
    n = d.size
    radius = float(np.max(np.abs(d)) + 2.0 * (np.max(np.abs(e)) if n > 1 else 0.0))
    lo, hi = window if window is not None else (-radius - 1.0, radius + 1.0)
    e2 = e ** 2
    n_lo = int(_sturm_count(d, e2, np.array([lo]))[0]) if n > 0 else 0
    n_hi = int(_sturm_count(d, e2, np.array([hi]))[0]) if n > 0 else 0
    # eigenvalue index i lies in (lo, hi] when n_lo <= i < n_hi (up to ties)
    idx = np.arange(n_lo, n_hi)
    if idx.size == 0:
        return np.zeros(0), (np.zeros((n, 0)) if want_vectors else None)
    left = np.full(idx.size, max(lo, -radius - 1.0))
    right = np.full(idx.size, min(hi, radius + 1.0))
    for _ in range(200):
        mid = 0.5 * (left + right)
        below = _sturm_count(d, e2, mid) > idx
        right = np.where(below, mid, right)
        left = np.where(below, left, mid)
        if np.all(right - left <= 4 * EPS * max(radius, 1.0)):
            break
    w = 0.5 * (left + right)
    if not want_vectors:
        return w, None
    vecs = np.zeros((n, w.size))
    band = np.zeros((3, n))
    band[0, 1:] = e
    band[2, :-1] = e
    rng = np.random.default_rng(12345)
    for col, lam in enumerate(w):
        band[1] = d - lam - 1e3 * EPS * max(radius, 1.0)
        x = rng.standard_normal(n)
        for _ in range(3):
            x = scipy.linalg.solve_banded((1, 1), band, x)
            x /= np.linalg.norm(x)
        vecs[:, col] = x
    # re-orthogonalize clusters
    if w.size > 1:
        vecs, _ = np.linalg.qr(vecs)
    return w, vecs


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float


def _check_log_spaced(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.size < 3:
        raise ValueError("at least 3 nodes required")
    if np.any(r <= 0):
        raise ValueError("log grid needs positive nodes")
    t = np.log(r)
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-8, atol=0.0):
        raise ValueError("nodes are not log-spaced")
    return t


def simpson_log(values: np.ndarray, r: np.ndarray) -> QuadratureResult:
    """Integrate f(r) dr = f(r(t)) r dt by composite Simpson in t = log r.

    Odd interval counts use the standard end correction of
    ``scipy.integrate.simpson``.  The error estimate compares with the same
    rule on every second node.
    """
    t = _check_log_spaced(r)
    y = np.asarray(values, dtype=float) * np.asarray(r, dtype=float)
    value = float(scipy.integrate.simpson(y, x=t))
    if t.size >= 5:
        coarse = float(scipy.integrate.simpson(y[::2], x=t[::2]))
        err = abs(value - coarse) / 15.0
    else:
        err = float("nan")
    return QuadratureResult(value, err)


def cumulative_log(values: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Running integral of f(r) dr from r[0] on a log-spaced grid."""
    t = _check_log_spaced(r)
    y = np.asarray(values, dtype=float) * np.asarray(r, dtype=float)
    return scipy.integrate.cumulative_simpson(y, x=t, initial=0.0)


_CENTRAL_FIRST = {
    2: (np.array([-1, 1]), np.array([-0.5, 0.5])),
    4: (np.array([-2, -1, 1, 2]), np.array([1.0, -8.0, 8.0, -1.0]) / 12.0),
    6: (np.array([-3, -2, -1, 1, 2, 3]), np.array([-1.0, 9.0, -45.0, 45.0, -9.0, 1.0]) / 60.0),
}


def central_first_derivative_stencil(accuracy: int = 4):
    """Offsets and weights of the centered first-derivative stencil."""
    if accuracy not in _CENTRAL_FIRST:
        raise ValueError(f"accuracy must be one of {sorted(_CENTRAL_FIRST)}")
    return _CENTRAL_FIRST[accuracy]


def directional_derivative(func, points: np.ndarray, direction: Sequence[float], h: float,
                           accuracy: int = 4) -> np.ndarray:
    """Centered FD derivative of a vectorised callable along one direction."""
    offsets, weights = central_first_derivative_stencil(accuracy)
    direction = np.asarray(direction, dtype=float)
    acc = None
    for off, wgt in zip(offsets, weights):
        val = wgt * func(points + off * h * direction)
        acc = val if acc is None else acc + val
    return acc / h


def compensated_sum(values) -> float:
    return math.fsum(float(v) for v in np.ravel(values))
