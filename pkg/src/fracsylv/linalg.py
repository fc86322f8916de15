"""Schur decomposition, structured Sylvester solver and right pseudoinverse.

The Sylvester systems met here pair a large, almost lower-triangular ``A``
(trailing block of the Caputo operational matrix) with a tiny dense ``B``
(spatial operator). Only ``B`` is Schur-factored; every shifted system in
``A`` is then a 2x2 head solve plus a forward substitution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .core import demote_real
from .exceptions import NonConvergenceError, RankDeficiencyError, SingularSystemError

__all__ = [
    "SchurDecomposition",
    "schur_decompose",
    "SylvesterSystem",
    "solve_sylvester",
    "sylvester_residual",
    "GramFactor",
    "right_pseudoinverse",
    "right_divide",
]

_EPS = np.finfo(float).eps
PIVOT_RTOL = 1e-13
RANK_RTOL = 1e-12


def _norm_inf(X) -> float:
    X = np.atleast_2d(X)
    return float(np.max(np.sum(np.abs(X), axis=1))) if X.size else 0.0


@dataclass(frozen=True)
class SchurDecomposition:
    """``B = Q T Q^H`` with ``Q`` unitary and ``T`` upper triangular (complex)."""

    Q: np.ndarray = field(repr=False)
    T: np.ndarray = field(repr=False)
    m: int

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.diag(self.T).copy()


def _givens(a: complex, b: complex):
    """``c`` real, ``s`` complex with ``[[c, s], [-conj(s), c]] @ [a, b] = [r, 0]``."""
    if b == 0:
        return 1.0, 0j
    if a == 0:
        return 0.0, 1.0 + 0j
    aa = abs(a)
    r = np.hypot(aa, abs(b))
    return aa / r, (a / aa) * np.conj(b) / r


def _hessenberg(H: np.ndarray, Q: np.ndarray) -> None:
    """In-place Householder reduction; accumulates the transform into ``Q``."""
    m = H.shape[0]
    for k in range(m - 2):
        x = H[k + 1 :, k]
        nx = np.linalg.norm(x)
        if nx == 0.0:
            continue
        v = x.copy()
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v[0] += phase * nx
        v /= np.linalg.norm(v)
        H[k + 1 :, :] -= 2.0 * np.outer(v, v.conj() @ H[k + 1 :, :])
        H[:, k + 1 :] -= 2.0 * np.outer(H[:, k + 1 :] @ v, v.conj())
        Q[:, k + 1 :] -= 2.0 * np.outer(Q[:, k + 1 :] @ v, v.conj())
        H[k + 2 :, k] = 0.0


def _wilkinson(H: np.ndarray, hi: int) -> complex:
    a, b = H[hi - 1, hi - 1], H[hi - 1, hi]
    c, d = H[hi, hi - 1], H[hi, hi]
    tr2 = (a + d) / 2.0
    disc = np.sqrt(((a - d) / 2.0) ** 2 + b * c + 0j)
    mu1, mu2 = tr2 + disc, tr2 - disc
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def _qr_step(H: np.ndarray, Q: np.ndarray, lo: int, hi: int, mu: complex) -> None:
    """One explicitly shifted QR step on the active window ``[lo, hi]``."""
    idx = np.arange(lo, hi + 1)
    H[idx, idx] -= mu
    rots = []
    for k in range(lo, hi):
        c, s = _givens(H[k, k], H[k + 1, k])
        rk, rk1 = H[k, k:].copy(), H[k + 1, k:].copy()
        H[k, k:] = c * rk + s * rk1
        H[k + 1, k:] = -np.conj(s) * rk + c * rk1
        H[k + 1, k] = 0.0
        rots.append((c, s))
    for k, (c, s) in zip(range(lo, hi), rots):
        top = min(k + 2, hi) + 1
        ck, ck1 = H[:top, k].copy(), H[:top, k + 1].copy()
        H[:top, k] = c * ck + np.conj(s) * ck1
        H[:top, k + 1] = -s * ck + c * ck1
        qk, qk1 = Q[:, k].copy(), Q[:, k + 1].copy()
        Q[:, k] = c * qk + np.conj(s) * qk1
        Q[:, k + 1] = -s * qk + c * qk1
    H[idx, idx] += mu


def schur_decompose(B, max_sweeps_per_dim: int = 100) -> SchurDecomposition:
    """Complex Schur form by Hessenberg reduction and shifted QR.

    Parameters
    ----------
    B : array_like, shape (m, m)
        Real or complex square matrix; intended for small ``m``.
    max_sweeps_per_dim : int
        The iteration gives up after ``max_sweeps_per_dim * m`` QR steps.

    Raises
    ------
    NonConvergenceError
        If a subdiagonal entry refuses to deflate within the sweep budget.
    """
    H = np.array(B, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ValueError("matrix has non-finite entries")
    m = H.shape[0]
    Q = np.eye(m, dtype=complex)
    _hessenberg(H, Q)
    scale = _norm_inf(H) or 1.0
    budget = max_sweeps_per_dim * m
    sweeps = 0
    since_deflation = 0
    hi = m - 1
    while hi > 0:
        for k in range(hi, 0, -1):
            ref = abs(H[k, k]) + abs(H[k - 1, k - 1])
            if abs(H[k, k - 1]) <= _EPS * (ref if ref > 0 else scale):
                H[k, k - 1] = 0.0
        if H[hi, hi - 1] == 0:
            hi -= 1
            since_deflation = 0
            continue
        lo = hi - 1
        while lo > 0 and H[lo, lo - 1] != 0:
            lo -= 1
        if sweeps >= budget:
            raise NonConvergenceError(
                f"Schur QR iteration did not converge within {budget} sweeps (m = {m})"
            )
        if since_deflation and since_deflation % 10 == 0:
            # exceptional shift breaks symmetric cycling
            mu = H[hi, hi] + 0.75 * abs(H[hi, hi - 1]) * (1 + 1j)
        else:
            mu = _wilkinson(H, hi)
        _qr_step(H, Q, lo, hi, mu)
        sweeps += 1
        since_deflation += 1
    T = np.triu(H)
    T.flags.writeable = False
    Q.flags.writeable = False
    return SchurDecomposition(Q, T, m)


@dataclass(frozen=True)
class SylvesterSystem:
    """``A U + U B = C`` with ``A`` lower triangular apart from ``A[0, 1]``."""

    A: np.ndarray = field(repr=False)
    B: np.ndarray = field(repr=False)
    C: np.ndarray = field(repr=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        B = np.asarray(self.B, dtype=float)
        C = np.asarray(self.C, dtype=float)
        n, m = C.shape if C.ndim == 2 else (-1, -1)
        if A.shape != (n, n) or B.shape != (m, m) or n < 1 or m < 1:
            raise ValueError(f"incompatible shapes A{A.shape}, B{B.shape}, C{C.shape}")
        upper = np.triu(A, 1)
        if n > 1:
            upper[0, 1] = 0.0
        if np.any(upper != 0):
            raise ValueError("A must be lower triangular except for the entry (0, 1)")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)


def sylvester_residual(sys: SylvesterSystem, U) -> float:
    """``|AU + UB - C|_inf / (|A||U| + |U||B| + |C|)`` (infinity norms)."""
    U = np.asarray(U)
    R = sys.A @ U + U @ sys.B - sys.C
    nU = _norm_inf(U)
    denom = _norm_inf(sys.A) * nU + nU * _norm_inf(sys.B) + _norm_inf(sys.C)
    r = _norm_inf(R)
    return r / denom if denom > 0 else r


def _solve_head(M2: np.ndarray, r: np.ndarray, tol: float) -> np.ndarray:
    """2x2 solve by Gaussian elimination with partial pivoting."""
    (a, b), (c, d) = M2
    if abs(c) > abs(a):
        a, b, c, d = c, d, a, b
        r0, r1 = r[1], r[0]
    else:
        r0, r1 = r[0], r[1]
    if abs(a) < tol:
        raise SingularSystemError(f"shifted system pivot {abs(a):.3e} below {tol:.3e}")
    f = c / a
    p2 = d - f * b
    if abs(p2) < tol:
        raise SingularSystemError(f"shifted system pivot {abs(p2):.3e} below {tol:.3e}")
    v1 = (r1 - f * r0) / p2
    v0 = (r0 - b * v1) / a
    return np.array([v0, v1])


def solve_sylvester(sys: SylvesterSystem, schur: SchurDecomposition | None = None) -> np.ndarray:
    """Solve ``A U + U B = C`` exploiting the structure of ``A``.

    ``B = Q T Q^H`` turns the equation into ``A V + V T = C Q``; column ``k``
    of ``V`` then solves ``(A + T_kk I) v_k = (CQ)_k - sum_{i<k} T_ik v_i``.

    Raises
    ------
    SingularSystemError
        A shifted system has a pivot below ``1e-13 * |A|_inf``.
    ConsistencyError
        The back-transformed solution has a non-negligible imaginary part.
    """
    A, C = sys.A, sys.C
    n, m = C.shape
    if schur is None:
        schur = schur_decompose(sys.B)
    elif schur.m != m:
        raise ValueError("Schur factorization does not match B")
    Q, T = schur.Q, schur.T
    tol = PIVOT_RTOL * max(_norm_inf(A), np.finfo(float).tiny)
    Ct = C @ Q
    V = np.empty((n, m), dtype=complex)
    diag_idx = np.arange(n - 2)
    tail = None
    if n > 2:
        # one complex buffer for the triangular tail; only its diagonal changes
        tail = np.tril(A[2:, 2:]).astype(complex)
        base_diag = A[2:, 2:].diagonal().copy()
    for k in range(m):
        shift = T[k, k]
        rhs = Ct[:, k] - V[:, :k] @ T[:k, k]
        if n == 1:
            piv = A[0, 0] + shift
            if abs(piv) < tol:
                raise SingularSystemError(f"shifted system pivot {abs(piv):.3e} below {tol:.3e}")
            V[0, k] = rhs[0] / piv
            continue
        head = A[:2, :2] + shift * np.eye(2)
        v = np.empty(n, dtype=complex)
        v[:2] = _solve_head(head, rhs[:2], tol)
        if n > 2:
            tail[diag_idx, diag_idx] = base_diag + shift
            piv = np.min(np.abs(tail[diag_idx, diag_idx]))
            if piv < tol:
                raise SingularSystemError(f"shifted system pivot {piv:.3e} below {tol:.3e}")
            v[2:] = solve_triangular(
                tail, rhs[2:] - A[2:, :2] @ v[:2], lower=True, check_finite=False
            )
        V[:, k] = v
    return demote_real(V @ Q.conj().T)


@dataclass(frozen=True)
class GramFactor:
    """Cholesky factor of ``E E^H`` for a full-row-rank ``E`` (``r < c`` or ``r == c``)."""

    E: np.ndarray = field(repr=False)
    chol: tuple = field(repr=False)

    @classmethod
    def of(cls, E) -> "GramFactor":
        E = np.asarray(E)
        if E.ndim != 2 or E.shape[0] > E.shape[1] or E.shape[0] < 1:
            raise ValueError(f"expected a wide r x c matrix with 1 <= r <= c, got {E.shape}")
        G = E @ E.conj().T
        gnorm = _norm_inf(G)
        try:
            chol = cho_factor(G, lower=True, check_finite=True)
        except np.linalg.LinAlgError as exc:
            raise RankDeficiencyError(f"Gram matrix is not positive definite: {exc}") from exc
        pivots = np.abs(np.diag(chol[0])) ** 2
        if pivots.min() < RANK_RTOL * gnorm:
            raise RankDeficiencyError(
                f"Gram pivot {pivots.min():.3e} below {RANK_RTOL:g} x |E E^H| = {RANK_RTOL * gnorm:.3e}"
            )
        return cls(E, chol)

    def pinv(self) -> np.ndarray:
        """``E^H (E E^H)^{-1}`` as a ``c x r`` matrix."""
        return cho_solve(self.chol, self.E).conj().T

    def right_divide(self, X) -> np.ndarray:
        """``X E^H (E E^H)^{-1}`` without forming the pseudoinverse."""
        X = np.asarray(X)
        Y = X @ self.E.conj().T
        return cho_solve(self.chol, Y.conj().T).conj().T


def right_pseudoinverse(E) -> np.ndarray:
    """Moore-Penrose inverse of a full-row-rank matrix.

    Raises
    ------
    RankDeficiencyError
        If a Cholesky pivot of ``E E^H`` falls below ``1e-12 * |E E^H|_inf``.
    """
    return GramFactor.of(E).pinv()


def right_divide(X, E) -> np.ndarray:
    """``X E†`` for full-row-rank ``E``."""
    return GramFactor.of(E).right_divide(X)
