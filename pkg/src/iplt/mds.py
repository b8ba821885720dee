"""MDS predicates and constructors: GRS codes, Cauchy matrices, samplers.

A matrix is MDS when every maximal square submatrix is invertible.  Besides
the exhaustive minor test this module can certify MDS-ness by recognising a
generalised Reed-Solomon (GRS) structure ``M = A . Vand(points) . diag(mult)``
with distinct points, nonzero multipliers and invertible ``A``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Literal

import numpy as np

from .errors import DegeneratePoints, FieldTooSmall, SamplingExhausted, ShapeError
from .field import PrimeField, pow_array
from .linalg import inverse, matmul, rank, rref

SamplerMode = Literal["grs", "uniform-rejection"]

DEFAULT_MAX_TRIES = 10_000
# GRS recognition scans every candidate for one normalised point; beyond this
# field size the scan is skipped and callers fall back to exhaustive methods.
GRS_SEARCH_LIMIT = 2**17
_SEARCH_CHUNK = 4096
_MINOR_BATCH = 8192


def vandermonde(rows: int, points, field: PrimeField) -> np.ndarray:
    """``rows`` x n matrix whose column j is ``(1, w_j, w_j^2, ...)``."""
    pts = field(points).reshape(-1)
    out = field.zeros((rows, pts.size))
    if rows:
        out[0] = 1
    for i in range(1, rows):
        out[i] = out[i - 1] * pts % field.p
    return out


def grs_generator(rows: int, points, multipliers, field: PrimeField) -> np.ndarray:
    return vandermonde(rows, points, field) * field(multipliers)[None, :] % field.p


@dataclass(frozen=True)
class GrsStructure:
    """Certificate that ``transform @ grs_generator(points, multipliers)`` is a matrix."""

    points: np.ndarray
    multipliers: np.ndarray
    transform: np.ndarray

    def columns(self, points, multipliers, field: PrimeField) -> np.ndarray:
        """Columns of the same code family evaluated at new points."""
        k = self.transform.shape[0]
        return matmul(self.transform, grs_generator(k, points, multipliers, field), field)


def _fit_cauchy_like(P: np.ndarray, field: PrimeField):
    """Find x, y, a, b with ``P[i, j] = a_i b_j / (y_j - x_i)``, all points distinct.

    Returns ``(x, y, a, b)`` or None.  The normalisation x_0 = 0, a_0 = b_0 = 1
    leaves x_1 free; every candidate for it is tried at once.
    """
    p = field.p
    k, r = P.shape
    if r == 0:
        return np.arange(k, dtype=np.int64), np.zeros(0, np.int64), np.ones(k, np.int64), np.zeros(0, np.int64)
    if k == 1:
        y = np.arange(1, r + 1, dtype=np.int64)
        return np.zeros(1, np.int64), y, np.ones(1, np.int64), P[0] * y % p
    if r == 1:
        x = np.arange(k, dtype=np.int64)
        return x, np.array([k], np.int64), P[:, 0] * ((k - x) % p) % p, np.ones(1, np.int64)
    if p > GRS_SEARCH_LIMIT:
        return None

    def inv(v):
        return pow_array(v % p, p - 2, p)

    y1 = int(inv(np.int64(P[0, 0])))
    for start in range(0, p, _SEARCH_CHUNK):
        x2 = np.arange(start, min(p, start + _SEARCH_CHUNK), dtype=np.int64)
        valid = (x2 != 0) & (x2 != y1)
        a2 = P[1, 0] * ((y1 - x2) % p) % p
        den = (P[1, 1] - P[1, 0] * P[0, 1] % p * ((y1 - x2) % p)) % p
        valid &= den != 0
        y2 = P[1, 1] * x2 % p * inv(den) % p
        b2 = P[0, 1] * y2 % p

        Pi1 = P[2:, 0][:, None]
        Pi2 = P[2:, 1][:, None]
        num = (Pi1 * y1 % p * b2 - Pi2 * y2) % p
        dn = (Pi1 * b2 - Pi2) % p
        valid &= (dn != 0).all(axis=0)
        xi = num * inv(dn) % p
        X = np.vstack([np.zeros_like(x2), x2, xi])

        P1j = P[0, 2:][:, None]
        P2j = P[1, 2:][:, None]
        dj = (P2j - a2 * P1j) % p
        valid &= (dj != 0).all(axis=0)
        yj = P2j * x2 % p * inv(dj) % p
        Y = np.vstack([np.full_like(x2, y1), y2, yj])

        a = P[:, 0][:, None] * ((y1 - X) % p) % p
        b = P[0, :][:, None] * Y % p
        valid &= (a != 0).all(axis=0) & (b != 0).all(axis=0)
        lhs = P[:, :, None] * ((Y[None, :, :] - X[:, None, :]) % p) % p
        rhs = a[:, None, :] * b[None, :, :] % p
        valid &= (lhs == rhs).all(axis=(0, 1))
        pts = np.sort(np.vstack([X, Y]), axis=0)
        valid &= (np.diff(pts, axis=0) != 0).all(axis=0)
        hits = np.flatnonzero(valid)
        if hits.size:
            c = int(hits[0])
            return X[:, c], Y[:, c], a[:, c], b[:, c]
    return None


def grs_structure(M, field: PrimeField) -> GrsStructure | None:
    """Recognise ``M`` (k x n, k >= 1) as a GRS generator up to row operations.

    Returns a verified certificate, or None when ``M`` is not GRS (or the
    field is too large to search).  A certificate implies ``M`` is MDS.
    """
    M = field(M)
    k, n = M.shape
    p = field.p
    if k == 0 or n > p or k > n:
        return None
    R, r, piv = rref(M, field)
    if r < k:
        return None
    pivset = set(piv)
    nonpiv = [c for c in range(n) if c not in pivset]
    P = R[:, nonpiv]
    if (P == 0).any():
        return None
    fit = _fit_cauchy_like(P, field)
    if fit is None:
        return None
    x, y, a, b = fit
    points = np.empty(n, dtype=np.int64)
    points[list(piv)] = x
    points[nonpiv] = y
    mult = np.empty(n, dtype=np.int64)
    for i, c in enumerate(piv):
        prod = 1
        for m in range(k):
            if m != i:
                prod = prod * (int(x[i]) - int(x[m])) % p
        mult[c] = pow(int(a[i]) * prod % p, -1, p)
    for j, c in enumerate(nonpiv):
        prod = 1
        for m in range(k):
            prod = prod * (int(y[j]) - int(x[m])) % p
        mult[c] = int(b[j]) * pow(prod, -1, p) % p
    N = grs_generator(k, points, mult, field)
    A = matmul(M[:, list(piv)], inverse(N[:, list(piv)], field), field)
    if not np.array_equal(matmul(A, N, field), M):
        return None
    return GrsStructure(points=points, multipliers=mult, transform=A)


def pure_grs_form(M, field: PrimeField) -> tuple[np.ndarray, np.ndarray] | None:
    """Points and multipliers when every column is ``g_j (1, w_j, w_j^2, ...)``.

    Needs at least two rows (a single row fixes no points).
    """
    M = field(M)
    k, n = M.shape
    p = field.p
    if k < 2 or n > p or (M[0] == 0).any():
        return None
    mult = M[0].copy()
    points = M[1] * pow_array(mult, p - 2, p) % p
    if np.unique(points).size != n:
        return None
    if not np.array_equal(grs_generator(k, points, mult, field), M):
        return None
    return points, mult


def _batched_nonsingular(stack: np.ndarray, p: int) -> np.ndarray:
    """Boolean per matrix in an (N, k, k) stack: is it invertible mod p."""
    A = stack.copy()
    N, k, _ = A.shape
    ok = np.ones(N, dtype=bool)
    idx = np.arange(N)
    for c in range(k):
        sub = A[:, c:, c] != 0
        has = sub.any(axis=1)
        ok &= has
        piv = c + np.argmax(sub, axis=1)
        rows_c = A[idx, c].copy()
        A[idx, c] = A[idx, piv]
        A[idx, piv] = rows_c
        pivval = A[:, c, c]
        inv = pow_array(pivval, p - 2, p)
        A[:, c] = A[:, c] * inv[:, None] % p
        factors = A[:, c + 1:, c]
        A[:, c + 1:] = (A[:, c + 1:] - factors[:, :, None] * A[:, c][:, None, :] % p) % p
    return ok


def exhaustive_is_mds(M, field: PrimeField) -> bool:
    """Check every maximal minor directly."""
    M = field(M)
    if M.ndim != 2:
        raise ShapeError(f"expected a matrix, got shape {M.shape}")
    k, n = M.shape
    if k > n:
        raise ShapeError(f"MDS test needs rows <= cols, got {M.shape}")
    if k == 0:
        return True
    combos = combinations(range(n), k)
    while True:
        batch = [c for _, c in zip(range(_MINOR_BATCH), combos)]
        if not batch:
            return True
        cols = np.array(batch, dtype=np.int64)
        stack = np.transpose(M[:, cols], (1, 0, 2))
        if not _batched_nonsingular(stack, field.p).all():
            return False


def is_mds(M, field: PrimeField, *, use_certificate: bool = True) -> bool:
    """True iff every maximal square submatrix of ``M`` is invertible.

    Cheap exact shortcuts run first: full rank, a zero-free systematic part,
    and GRS recognition.  Anything inconclusive goes to the exhaustive test.
    """
    M = field(M)
    if M.ndim != 2:
        raise ShapeError(f"expected a matrix, got shape {M.shape}")
    k, n = M.shape
    if k > n:
        raise ShapeError(f"MDS test needs rows <= cols, got {M.shape}")
    if k == 0:
        return True
    R, r, piv = rref(M, field)
    if r < k:
        return False
    pivset = set(piv)
    if (R[:, [c for c in range(n) if c not in pivset]] == 0).any():
        return False
    if use_certificate and grs_structure(M, field) is not None:
        return True
    return exhaustive_is_mds(M, field)


def cauchy_matrix(x, y, field: PrimeField) -> np.ndarray:
    """m x t matrix with entry (i, j) equal to ``1 / (x_i - y_j)``."""
    xs = field(x).reshape(-1)
    ys = field(y).reshape(-1)
    if np.unique(np.concatenate([xs, ys])).size != xs.size + ys.size:
        raise DegeneratePoints("Cauchy points must be pairwise distinct across x and y")
    diff = (xs[:, None] - ys[None, :]) % field.p
    return pow_array(diff, field.p - 2, field.p)


def random_invertible(n: int, field: PrimeField, rng: np.random.Generator,
                      max_tries: int = DEFAULT_MAX_TRIES) -> np.ndarray:
    for _ in range(max_tries):
        A = field.random((n, n), rng)
        if rank(A, field) == n:
            return A
    raise SamplingExhausted(f"no invertible {n}x{n} matrix in {max_tries} draws")


def random_grs_columns(count: int, exclude, field: PrimeField, rng: np.random.Generator):
    """Fresh distinct points avoiding ``exclude`` plus nonzero multipliers."""
    taken = np.zeros(field.p, dtype=bool)
    taken[field(exclude).reshape(-1)] = True
    free = np.flatnonzero(~taken)
    if free.size < count:
        raise FieldTooSmall(f"need {count} new evaluation points, only {free.size} left in F_{field.p}")
    points = rng.permutation(free)[:count].astype(np.int64)
    return points, field.random_nonzero(count, rng)


def sample_mds(rows: int, cols: int, field: PrimeField, rng: np.random.Generator,
               mode: SamplerMode = "grs", max_tries: int = DEFAULT_MAX_TRIES) -> np.ndarray:
    """Random rows x cols MDS matrix.

    ``grs`` draws a GRS generator and mixes its rows with a random invertible
    matrix.  ``uniform-rejection`` draws uniform matrices until one is MDS,
    which gives the uniform distribution on MDS matrices of that shape.
    """
    if rows > cols:
        raise ShapeError(f"MDS matrix needs rows <= cols, got {rows}x{cols}")
    if rows == 0:
        return field.zeros((0, cols))
    if mode == "grs":
        if cols > field.p:
            raise FieldTooSmall(f"GRS needs {cols} distinct points but p = {field.p}")
        points, mult = random_grs_columns(cols, [], field, rng)
        A = random_invertible(rows, field, rng, max_tries)
        return matmul(A, grs_generator(rows, points, mult, field), field)
    if mode == "uniform-rejection":
        for _ in range(max_tries):
            M = field.random((rows, cols), rng)
            if is_mds(M, field):
                return M
        raise SamplingExhausted(f"no {rows}x{cols} MDS matrix over F_{field.p} in {max_tries} draws")
    raise ValueError(f"unknown sampler mode {mode!r}")
