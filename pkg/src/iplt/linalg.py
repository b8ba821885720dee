"""Dense linear algebra over a prime field.

All routines take reduced int64 arrays and return reduced int64 arrays.
"""

from __future__ import annotations

import numpy as np

from .errors import RankError, ShapeError
from .field import PrimeField, field_inv

_INT64_MAX = 2**63 - 1


def _as_matrix(M, field: PrimeField) -> np.ndarray:
    arr = field(M)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {arr.shape}")
    return arr


def matmul(A, B, field: PrimeField) -> np.ndarray:
    """Product ``A @ B`` mod p, chunking the inner dimension against overflow."""
    A = field(A)
    B = field(B)
    inner = A.shape[-1]
    if B.shape[0] != inner:
        raise ShapeError(f"cannot multiply {A.shape} by {B.shape}")
    step = max(1, _INT64_MAX // max(1, (field.p - 1) ** 2))
    if inner <= step:
        return (A @ B) % field.p
    out = None
    for start in range(0, inner, step):
        part = (A[..., start:start + step] @ B[start:start + step]) % field.p
        out = part if out is None else (out + part) % field.p
    return out


def rref(M, field: PrimeField) -> tuple[np.ndarray, int, tuple[int, ...]]:
    """Reduced row-echelon form, rank and pivot columns (0-based)."""
    A = _as_matrix(M, field).copy()
    p = field.p
    rows, cols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        A[r] = A[r] * field_inv(int(A[r, c]), field) % p
        factors = A[:, c].copy()
        factors[r] = 0
        if factors.any():
            A = (A - np.outer(factors, A[r]) % p) % p
        pivots.append(c)
        r += 1
    return A, r, tuple(pivots)


def rank(M, field: PrimeField) -> int:
    return rref(M, field)[1]


def det(M, field: PrimeField) -> int:
    A = _as_matrix(M, field).copy()
    n = A.shape[0]
    if A.shape[1] != n:
        raise ShapeError(f"determinant of non-square {A.shape}")
    p = field.p
    d = 1
    for c in range(n):
        nz = np.flatnonzero(A[c:, c])
        if nz.size == 0:
            return 0
        piv = c + int(nz[0])
        if piv != c:
            A[[c, piv]] = A[[piv, c]]
            d = -d
        d = d * int(A[c, c]) % p
        inv = field_inv(int(A[c, c]), field)
        below = A[c + 1:, c] * inv % p
        A[c + 1:] = (A[c + 1:] - np.outer(below, A[c]) % p) % p
    return d % p


def inverse(M, field: PrimeField) -> np.ndarray:
    A = _as_matrix(M, field)
    n = A.shape[0]
    if A.shape[1] != n:
        raise ShapeError(f"inverse of non-square {A.shape}")
    R, r, _ = rref(np.hstack([A, field.identity(n)]), field)
    if r < n or not np.array_equal(R[:, :n], field.identity(n)):
        raise RankError("matrix is singular")
    return R[:, n:]


def solve(A, B, field: PrimeField) -> np.ndarray:
    """One solution ``X`` of ``A X = B`` (free variables set to zero).

    ``B`` may be a vector or a matrix. Raises ``RankError`` when inconsistent.
    """
    A = _as_matrix(A, field)
    B = field(B)
    vector = B.ndim == 1
    if vector:
        B = B[:, None]
    if B.shape[0] != A.shape[0]:
        raise ShapeError(f"right-hand side has {B.shape[0]} rows, expected {A.shape[0]}")
    n = A.shape[1]
    R, _, pivots = rref(np.hstack([A, B]), field)
    if any(c >= n for c in pivots):
        raise RankError("linear system is inconsistent")
    X = field.zeros((n, B.shape[1]))
    for row, c in enumerate(pivots):
        X[c] = R[row, n:]
    return X[:, 0] if vector else X


def solve_left(A, B, field: PrimeField) -> np.ndarray:
    """One solution ``X`` of ``X A = B``."""
    return solve(field(A).T, field(B).T, field).T


def nullspace(M, field: PrimeField) -> np.ndarray:
    """Basis of ``{x : M x = 0}`` as the rows of the returned matrix.

    The basis is canonical: it carries an identity block on the non-pivot
    columns of ``rref(M)``.
    """
    A = _as_matrix(M, field)
    cols = A.shape[1]
    R, r, pivots = rref(A, field)
    free = [c for c in range(cols) if c not in set(pivots)]
    N = field.zeros((len(free), cols))
    for k, f in enumerate(free):
        N[k, f] = 1
        for row, c in enumerate(pivots):
            N[k, c] = (-R[row, f]) % field.p
    return N
