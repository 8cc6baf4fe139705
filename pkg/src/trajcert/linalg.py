"""Dense real linear algebra used throughout the package.

Symmetric matrices are carried as packed vectors: the ``n`` diagonal entries
first, then the strict upper triangle row by row
(``P12..P1n, P23..P2n, ..., P(n-1)n``). The pairing ``oplus(x, y)`` is laid
out in the same order so that ``oplus(x, y) @ sym_pack(P) == x @ P @ y``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import (
    LengthMismatch,
    NonSquare,
    NormTooLarge,
    NotPositiveDefinite,
    NotSymmetric,
    Singular,
)

SYMMETRY_RTOL = 1e-12
PIVOT_RTOL = 1e-12
EXPM_MAX_NORM = 1e6


def packed_size(n: int) -> int:
    return n * (n + 1) // 2


def state_dim(k: int) -> int:
    """Inverse of ``packed_size``; raises if ``k`` is not triangular."""
    n = int(round((math.sqrt(8 * k + 1) - 1) / 2))
    if packed_size(n) != k or n < 1:
        raise LengthMismatch(f"{k} is not a packed-symmetric length n(n+1)/2")
    return n


def _offdiag_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    # np.triu_indices walks the upper triangle row-major, matching the packing
    return np.triu_indices(n, k=1)


def _as_square(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {M.shape}")
    return M


def check_symmetric(M, rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    M = _as_square(M)
    scale = np.max(np.abs(M)) if M.size else 0.0
    if np.max(np.abs(M - M.T), initial=0.0) > rtol * max(scale, np.finfo(float).tiny):
        raise NotSymmetric("matrix is not symmetric")
    return M


def sym_pack(P) -> np.ndarray:
    """Pack a symmetric matrix into its ``n(n+1)/2`` unique entries."""
    P = check_symmetric(P)
    iu, ju = _offdiag_index(P.shape[0])
    return np.concatenate([np.diag(P), P[iu, ju]])


def sym_unpack(p) -> np.ndarray:
    p = np.asarray(p, dtype=float).ravel()
    n = state_dim(p.size)
    P = np.diag(p[:n])
    iu, ju = _offdiag_index(n)
    P[iu, ju] = p[n:]
    P[ju, iu] = p[n:]
    return P


def oplus(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise LengthMismatch(f"oplus needs equal lengths, got {x.size} and {y.size}")
    iu, ju = _offdiag_index(x.size)
    return np.concatenate([x * y, x[iu] * y[ju] + x[ju] * y[iu]])


def oplus_rows(X, Y) -> np.ndarray:
    """Row-wise ``oplus`` of two ``(k, n)`` sample arrays."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if X.shape != Y.shape:
        raise LengthMismatch(f"shape mismatch {X.shape} vs {Y.shape}")
    iu, ju = _offdiag_index(X.shape[1])
    return np.hstack([X * Y, X[:, iu] * Y[:, ju] + X[:, ju] * Y[:, iu]])


def quad_form(p, x, y=None) -> float:
    """``x' P y`` evaluated on the packed representation of ``P``."""
    p = np.asarray(p, dtype=float).ravel()
    y = x if y is None else y
    v = oplus(x, y)
    if v.size != p.size:
        raise LengthMismatch(f"packed length {p.size} does not match vectors of length {np.size(x)}")
    return float(v @ p)


def cholesky(M) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == M``.

    Raises NotPositiveDefinite as soon as a pivot is not strictly positive.
    """
    M = check_symmetric(M)
    n = M.shape[0]
    L = np.zeros_like(M)
    for j in range(n):
        d = M[j, j] - L[j, :j] @ L[j, :j]
        if not d > 0.0:
            raise NotPositiveDefinite(f"pivot {j} is {d:.3e}")
        L[j, j] = math.sqrt(d)
        L[j + 1:, j] = (M[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def is_positive_definite(M) -> bool:
    try:
        cholesky(M)
    except NotPositiveDefinite:
        return False
    return True


def lu_factor(A) -> tuple[np.ndarray, np.ndarray]:
    """Doolittle LU with partial pivoting, packed in one array.

    Returns ``(LU, perm)`` with ``A[perm] == L @ U``. Raises Singular when a
    pivot falls below ``1e-12 * max|A|``.
    """
    A = _as_square(A)
    n = A.shape[0]
    LU = A.copy()
    perm = np.arange(n)
    tol = PIVOT_RTOL * np.max(np.abs(A), initial=0.0)
    for k in range(n):
        r = k + int(np.argmax(np.abs(LU[k:, k])))
        if abs(LU[r, k]) <= tol or LU[r, k] == 0.0:
            raise Singular(f"pivot {k} below tolerance")
        if r != k:
            LU[[k, r]] = LU[[r, k]]
            perm[[k, r]] = perm[[r, k]]
        LU[k + 1:, k] /= LU[k, k]
        LU[k + 1:, k + 1:] -= np.outer(LU[k + 1:, k], LU[k, k + 1:])
    return LU, perm


def lu_solve(A, b) -> np.ndarray:
    """Solve ``A x = b``; ``b`` may be a vector or a matrix of right-hand sides."""
    LU, perm = lu_factor(A)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != LU.shape[0]:
        raise LengthMismatch(f"rhs has {b.shape[0]} rows, matrix has {LU.shape[0]}")
    x = b[perm].copy()
    n = LU.shape[0]
    for i in range(1, n):
        x[i] -= LU[i, :i] @ x[:i]
    for i in range(n - 1, -1, -1):
        x[i] = (x[i] - LU[i, i + 1:] @ x[i + 1:]) / LU[i, i]
    return x


def det(A) -> float:
    """Determinant via LU; zero for matrices flagged singular."""
    try:
        LU, perm = lu_factor(A)
    except Singular:
        return 0.0
    # parity of the permutation
    sign, seen = 1.0, np.zeros(perm.size, dtype=bool)
    for i in range(perm.size):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign * float(np.prod(np.diag(LU)))


def kron(A, B) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    ra, ca = A.shape
    rb, cb = B.shape
    return (A[:, None, :, None] * B[None, :, None, :]).reshape(ra * rb, ca * cb)


# [6/6] Pade coefficients c_k = (12-k)! 6! / (12! k! (6-k)!)
_PADE6 = tuple(
    math.factorial(12 - k) * math.factorial(6) / (math.factorial(12) * math.factorial(k) * math.factorial(6 - k))
    for k in range(7)
)
_EXPM_THETA = 0.5


def expm(A) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a [6/6] Pade approximant.

    ``A`` is scaled by ``2**-s`` with the smallest ``s`` for which
    ``||A||_inf / 2**s <= 1/2``. At that radius the Pade backward error is
    about ``3.4e-16``, so accuracy is limited by the ``s`` squarings.
    """
    A = _as_square(A)
    n = A.shape[0]
    norm = np.max(np.sum(np.abs(A), axis=1), initial=0.0)
    if norm > EXPM_MAX_NORM:
        raise NormTooLarge(f"||A||_inf = {norm:.3e} exceeds {EXPM_MAX_NORM:.0e}")
    s = 0 if norm <= _EXPM_THETA else int(math.ceil(math.log2(norm / _EXPM_THETA)))
    X = A / 2.0**s
    ident = np.eye(n)
    X2 = X @ X
    X4 = X2 @ X2
    X6 = X4 @ X2
    c = _PADE6
    even = c[0] * ident + c[2] * X2 + c[4] * X4 + c[6] * X6
    odd = X @ (c[1] * ident + c[3] * X2 + c[5] * X4)
    E = lu_solve(even - odd, even + odd)
    for _ in range(s):
        E = E @ E
    return E
