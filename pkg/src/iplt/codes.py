"""Code-level constructions: duals, pinned MDS extension, embedded generators.

Column positions in this module are 0-based.
"""

from __future__ import annotations

from itertools import combinations
from typing import Literal, Sequence

import numpy as np

from .errors import FieldTooSmall, InvalidParameters, NotMds, RankError, SamplingExhausted, ShapeError
from .field import PrimeField
from .linalg import matmul, nullspace, rank
from .mds import (
    DEFAULT_MAX_TRIES,
    grs_generator,
    grs_structure,
    is_mds,
    pure_grs_form,
    random_grs_columns,
)

DualMethod = Literal["auto", "canonical"]
ExtendMethod = Literal["auto", "grs", "rejection"]

_CANDIDATE_BATCH = 64


def _dual(M: np.ndarray, field: PrimeField, method: DualMethod) -> np.ndarray:
    k, n = M.shape
    if k == n:
        return field.zeros((0, n))
    if k == 0:
        return field.identity(n)
    if method == "auto":
        form = pure_grs_form(M, field)
        if form is not None:
            # The dual of GRS(points, g) is GRS(points, beta) with
            # beta_j = 1 / (g_j * prod_{m != j} (w_j - w_m)).
            points, mult = form
            p = field.p
            diffs = (points[:, None] - points[None, :]) % p
            np.fill_diagonal(diffs, 1)
            prod = np.ones(n, dtype=np.int64)
            for col in diffs.T:
                prod = prod * col % p
            beta = field.inv_array(mult * prod % p)
            return grs_generator(n - k, points, beta, field)
    elif method != "canonical":
        raise ValueError(f"unknown dual method {method!r}")
    return nullspace(M, field)


def parity_check(V, field: PrimeField, *, method: DualMethod = "auto", check: bool = True) -> np.ndarray:
    """(D - L) x D matrix whose rows span the dual of the row space of ``V``.

    ``canonical`` returns the RREF null-space basis (identity on the
    non-pivot columns).  ``auto`` returns the closed-form GRS dual when ``V``
    is literally a Vandermonde-with-multipliers matrix, else the canonical one.
    """
    V = field(V)
    if V.ndim != 2:
        raise ShapeError(f"expected a matrix, got shape {V.shape}")
    if check and not is_mds(V, field):
        raise NotMds("parity_check needs an MDS generator")
    return _dual(V, field, method)


def generator_from_parity(H, field: PrimeField, *, method: DualMethod = "auto") -> np.ndarray:
    """(n - a) x n generator of the code whose parity-check matrix is ``H``."""
    H = field(H)
    if H.ndim != 2:
        raise ShapeError(f"expected a matrix, got shape {H.shape}")
    if rank(H, field) < H.shape[0]:
        raise RankError("parity-check matrix must have full row rank")
    return _dual(H, field, method)


def _check_positions(positions: Sequence[int], b: int, n: int) -> list[int]:
    pos = [int(x) for x in positions]
    if len(pos) != b:
        raise ShapeError(f"{len(pos)} positions given for {b} pinned columns")
    if len(set(pos)) != b or any(x < 0 or x >= n for x in pos):
        raise InvalidParameters(f"positions must be distinct and inside 0..{n - 1}")
    return pos


def _rejection_fill(pinned: np.ndarray, count: int, field: PrimeField,
                    rng: np.random.Generator, max_tries: int) -> np.ndarray:
    """Append ``count`` random columns, each keeping every maximal minor nonzero.

    A candidate is accepted when it lies off every hyperplane spanned by
    (a - 1) of the columns placed so far.
    """
    a = pinned.shape[0]
    cols = [pinned[:, j] for j in range(pinned.shape[1])]
    new = []
    for _ in range(count):
        normals = np.array([nullspace(np.array(sub, dtype=np.int64).reshape(len(sub), a), field)[0]
                            for sub in combinations(cols, a - 1)], dtype=np.int64)
        tries = 0
        chosen = None
        while chosen is None:
            if tries >= max_tries:
                raise SamplingExhausted(f"no admissible column after {max_tries} draws")
            batch = min(_CANDIDATE_BATCH, max_tries - tries)
            cand = field.random((a, batch), rng)
            ok = (matmul(normals, cand, field) != 0).all(axis=0)
            hits = np.flatnonzero(ok)
            if hits.size:
                chosen = cand[:, hits[0]]
                tries += int(hits[0]) + 1
            else:
                tries += batch
        cols.append(chosen)
        new.append(chosen)
    return np.array(new, dtype=np.int64).T.reshape(a, count)


def extend_pinned_mds(Lam, n: int, positions: Sequence[int], field: PrimeField,
                      rng: np.random.Generator, *, method: ExtendMethod = "auto",
                      free_columns=None, max_tries: int = DEFAULT_MAX_TRIES) -> np.ndarray:
    """a x n MDS matrix whose columns at ``positions`` are the columns of ``Lam``.

    ``grs`` recognises ``Lam`` as a GRS code and appends columns of the same
    code at fresh points.  ``rejection`` draws random columns and keeps one
    only when no maximal minor vanishes, up to ``max_tries`` per column.
    ``auto`` tries GRS and falls back to rejection.  ``free_columns`` injects
    the new columns (left to right) instead of sampling them.
    """
    Lam = field(Lam)
    if Lam.ndim != 2:
        raise ShapeError(f"expected a matrix, got shape {Lam.shape}")
    a, b = Lam.shape
    if n < b:
        raise ShapeError(f"target length {n} is shorter than {b} pinned columns")
    pos = _check_positions(positions, b, n)
    free = [c for c in range(n) if c not in set(pos)]
    H = field.zeros((a, n))
    H[:, pos] = Lam
    if a == 0 or not free:
        if a and not is_mds(Lam, field):
            raise NotMds("pinned matrix is not MDS")
        return H

    if free_columns is not None:
        fill = field(free_columns)
        if fill.shape != (a, len(free)):
            raise ShapeError(f"free columns must be {a}x{len(free)}, got {fill.shape}")
        H[:, free] = fill
        if not is_mds(H, field):
            raise NotMds("injected columns do not give an MDS matrix")
        return H

    if method in ("auto", "grs"):
        structure = grs_structure(Lam, field)
        if structure is not None:
            try:
                points, mult = random_grs_columns(len(free), structure.points, field, rng)
            except FieldTooSmall:
                if method == "grs":
                    raise
            else:
                H[:, free] = structure.columns(points, mult, field)
                return H
        elif method == "grs":
            raise NotMds("pinned matrix has no recognisable GRS structure")
    elif method != "rejection":
        raise ValueError(f"unknown extension method {method!r}")

    if not is_mds(Lam, field):
        raise NotMds("pinned matrix is not MDS")
    H[:, free] = _rejection_fill(Lam, len(free), field, rng, max_tries)
    return H


def embed_mds_generator(v_tilde, n: int, subset: Sequence[int], field: PrimeField,
                        rng: np.random.Generator, *, parity=None, extended=None,
                        method: ExtendMethod = "auto") -> np.ndarray:
    """(L + n - D) x n MDS generator whose row space contains ``v_tilde`` on ``subset``.

    Composition: dual of ``v_tilde``, pinned extension of that dual onto the
    0-based positions ``subset``, dual again.  ``parity`` and ``extended``
    inject the two intermediate matrices.
    """
    V = field(v_tilde)
    L, D = V.shape
    pos = _check_positions(subset, D, n)
    if n >= field.p:
        raise FieldTooSmall(f"length {n} needs p > {n}, got {field.p}")
    if parity is None:
        Lam = parity_check(V, field)
    else:
        Lam = field(parity)
        if Lam.shape != (D - L, D) or matmul(V, Lam.T, field).any():
            raise InvalidParameters("injected parity-check matrix does not annihilate the demand rows")
    if extended is None:
        H = extend_pinned_mds(Lam, n, pos, field, rng, method=method)
    else:
        H = field(extended)
        if H.shape != (D - L, n) or not np.array_equal(H[:, pos], Lam):
            raise InvalidParameters("injected extension does not carry the parity-check columns")
    return generator_from_parity(H, field)
