"""Privacy and recoverability audits.

Three tools:

* ``structural_posterior`` computes Pr(i in W | query) exactly from the
  combinatorics of how the query is generated (which block each index lands
  in, how many embedding subsets are compatible).
* ``monte_carlo_audit`` samples the generator many times and compares the
  empirical posterior under a coarse observable of the query against the
  prior D/K.  The observable is, for every message index, the block its
  image under pi falls in.
* ``recoverability_fuzz`` runs full sessions and checks the decoded demand.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import asdict, dataclass, field as dc_field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidParameters, IpltError
from .field import PrimeField
from .linalg import matmul, nullspace, rank
from .mds import is_mds
from .protocol import (
    BlockLayout,
    Demand,
    Query,
    answer,
    check_permutation,
    gen_query,
    make_layout,
    recover,
    sample_structure,
)

MC_MAX_K = 8


def last_block_weight(layout: BlockLayout) -> Fraction:
    """Share of demand placements in the last block that cover a given column.

    Case I: s / r with s = C(t+m-1, t) subsets containing a given column block
    out of r = C(t+m, t+1).  Case II: C(D+R-1, D-1) / C(D+R, D).
    """
    if layout.case == 1:
        t, m = layout.t, layout.m
        return Fraction(comb(t + m - 1, t), comb(t + m, t + 1))
    width = layout.D + layout.R
    return Fraction(comb(width - 1, layout.D - 1), comb(width, layout.D))


def structural_posterior(layout: BlockLayout, pi: Sequence[int]) -> list[Fraction]:
    """Exact Pr(i in W | query) for every message index i.

    An index whose image lies in one of the first n blocks is in W exactly
    when that block was selected (probability D/K).  An image in the last
    block needs the last block selected ((D+R)/K) and the embedding to cover
    it.  The vector is normalised to sum to D = E|W|.
    """
    pi = check_permutation(pi, layout.K)
    in_block = Fraction(layout.D, layout.K)
    in_last = last_block_weight(layout) * Fraction(layout.D + layout.R, layout.K)
    weights = [in_block if layout.block_of_column(int(c)) <= layout.n else in_last for c in pi]
    total = sum(weights)
    return [w * layout.D / total for w in weights]


def supported_subspace(G, columns: Sequence[int], field: PrimeField) -> np.ndarray:
    """Basis of the codewords of rowspace(G) vanishing off ``columns`` (0-based).

    Returned restricted to ``columns``.
    """
    G = field(G)
    outside = [c for c in range(G.shape[1]) if c not in set(columns)]
    if outside:
        coeffs = nullspace(G[:, outside].T, field)
    else:
        coeffs = field.identity(G.shape[0])
    words = matmul(coeffs, G, field)[:, list(columns)]
    R = nullspace(nullspace(words, field), field)  # row-reduced basis of the span
    return R


def candidate_supports(layout: BlockLayout) -> Iterable[tuple[int, ...]]:
    """Every column set (0-based) the demand could occupy for this layout."""
    D, n = layout.D, layout.n
    for i in range(n):
        yield tuple(range(i * D, (i + 1) * D))
    base = n * D
    if layout.case == 1:
        S = layout.S
        for I in combinations(range(layout.t + layout.m), layout.t + 1):
            yield tuple(base + j * S + f for j in I for f in range(S))
    else:
        for h in combinations(range(D + layout.R), D):
            yield tuple(base + j for j in h)


def support_check(query: Query, layout: BlockLayout, field: PrimeField) -> list[tuple[int, ...]]:
    """Candidate supports NOT carrying an L-dimensional MDS subcode of rowspace(G).

    For the query to hide W, every column set where the demand could sit must
    look like it carries L independent MDS combinations.  Returns the failing
    sets (empty when the query passes).
    """
    failures = []
    for cols in candidate_supports(layout):
        basis = supported_subspace(query.G, cols, field)
        if basis.shape[0] != layout.L or not is_mds(basis, field):
            failures.append(cols)
    return failures


@dataclass
class AuditReport:
    K: int
    D: int
    L: int
    trials: int
    prior: float
    max_deviation: float
    worst_cell: dict
    tv_distance: list[float]
    observed_classes: int
    flagged_classes: int
    min_cell: int
    sampler: str
    seed: int | None = None
    notes: list[str] = dc_field(default_factory=list)

    @property
    def max_tv(self) -> float:
        return max(self.tv_distance) if self.tv_distance else 0.0

    def passes(self, threshold: float = 0.02) -> bool:
        return self.max_deviation <= threshold and self.max_tv <= threshold

    def to_json(self) -> str:
        data = asdict(self)
        data["max_tv"] = self.max_tv
        return json.dumps(data, indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [
            f"monte carlo audit K={self.K} D={self.D} L={self.L} trials={self.trials} sampler={self.sampler}",
            f"  prior D/K                 {self.prior:.6f}",
            f"  observable classes        {self.observed_classes} ({self.flagged_classes} below {self.min_cell} samples, excluded)",
            f"  max |posterior - prior|   {self.max_deviation:.6f}  at {self.worst_cell}",
            f"  max per-index TV          {self.max_tv:.6f}",
            "  per-index TV              " + " ".join(f"{v:.4f}" for v in self.tv_distance),
        ]
        lines += [f"  note: {n}" for n in self.notes]
        return "\n".join(lines)


def region_signature(layout: BlockLayout, pi: np.ndarray) -> bytes:
    """Block index of pi(i) for every i, packed as bytes."""
    return (np.minimum((pi - 1) // layout.D, layout.n) + 1).astype(np.uint8).tobytes()


def monte_carlo_audit(K: int, D: int, L: int, trials: int, rng: np.random.Generator, *,
                      field: PrimeField | None = None, full: bool = False, mode: str = "grs",
                      min_cell: int = 100) -> AuditReport:
    """Empirical check that every index is in W with probability D/K given the observable.

    By default each trial draws a uniform W and runs the structural part of
    query generation (``sample_structure``, the same code ``gen_query`` uses),
    which is all the observable depends on.  ``full=True`` draws a random
    MDS V and runs ``gen_query`` end to end; it is much slower.
    """
    if K > MC_MAX_K:
        raise InvalidParameters(f"Monte Carlo audit is limited to K <= {MC_MAX_K}")
    layout = make_layout(K, D, L)
    if full:
        field = field or PrimeField(_next_prime_above(D + layout.R))
    counts: Counter[bytes] = Counter()
    hits: dict[bytes, np.ndarray] = {}
    for _ in range(trials):
        W = np.sort(rng.permutation(K)[:D]) + 1
        if full:
            demand = Demand(K, tuple(W.tolist()), _random_v(L, D, field, rng, mode), field, check_mds=False)
            pi = gen_query(demand, rng, mode=mode)[0].pi
        else:
            pi = sample_structure(layout, W, rng).pi
        key = region_signature(layout, pi)
        counts[key] += 1
        vec = hits.get(key)
        if vec is None:
            vec = hits[key] = np.zeros(K, dtype=np.int64)
        vec[W - 1] += 1

    prior = D / K
    worst = (0.0, {})
    flagged = 0
    for key, total in counts.items():
        if total < min_cell:
            flagged += 1
            continue
        est = hits[key] / total
        dev = np.abs(est - prior)
        i = int(np.argmax(dev))
        if dev[i] > worst[0]:
            worst = (float(dev[i]), {"index": i + 1, "observable": list(key), "samples": total,
                                     "estimate": float(est[i])})

    tv = []
    notes = []
    for i in range(K):
        n_in = sum(int(hits[k][i]) for k in counts)
        n_out = trials - n_in
        if n_in == 0 or n_out == 0:
            tv.append(0.0)
            notes.append(f"index {i + 1}: one side of the TV comparison is empty")
            continue
        tv.append(0.5 * sum(abs(int(hits[k][i]) / n_in - (counts[k] - int(hits[k][i])) / n_out)
                            for k in counts))
    if flagged:
        notes.append(f"{flagged} observable classes had fewer than {min_cell} samples")
    return AuditReport(K, D, L, trials, prior, worst[0], worst[1], tv, len(counts), flagged,
                       min_cell, "full" if full else "structural", notes=notes)


def _random_v(L: int, D: int, field: PrimeField, rng: np.random.Generator, mode: str) -> np.ndarray:
    from .mds import sample_mds

    return sample_mds(L, D, field, rng, mode)


def _next_prime_above(n: int) -> int:
    from .field import is_prime

    q = n + 1
    while not is_prime(q):
        q += 1
    return q


@dataclass
class FuzzCell:
    K: int
    D: int
    L: int
    case: int
    sessions: int
    passed: int
    demand_in_last: int
    first_failure: str | None = None


@dataclass
class FuzzReport:
    cells: list[FuzzCell]

    @property
    def sessions(self) -> int:
        return sum(c.sessions for c in self.cells)

    @property
    def ok(self) -> bool:
        return all(c.passed == c.sessions for c in self.cells)

    def failures(self) -> list[FuzzCell]:
        return [c for c in self.cells if c.passed != c.sessions]

    def to_text(self) -> str:
        lines = [f"{'K':>3} {'D':>3} {'L':>3} case  pass/total  last-block"]
        for c in self.cells:
            mark = "" if c.passed == c.sessions else f"  FAIL: {c.first_failure}"
            lines.append(f"{c.K:>3} {c.D:>3} {c.L:>3}   {'I' if c.case == 1 else 'II':<3} "
                         f"{c.passed:>5}/{c.sessions:<5} {c.demand_in_last:>5}{mark}")
        return "\n".join(lines)


def valid_grid(max_k: int, p: int) -> list[tuple[int, int, int]]:
    """All (K, D, L) with 1 <= L <= D <= K <= max_k and p > D + (K mod D)."""
    return [(K, D, L) for K in range(1, max_k + 1) for D in range(1, K + 1)
            for L in range(1, D + 1) if p > D + K % D]


def recoverability_fuzz(grid: Sequence[tuple[int, int, int]], seeds_per_cell: int, field: PrimeField,
                        *, seed: int = 0, mode: str = "grs") -> FuzzReport:
    """End-to-end sessions; a session passes when the decoded Z equals V X_W."""
    cells = []
    for K, D, L in grid:
        layout = make_layout(K, D, L)
        passed = last = 0
        failure = None
        for s in range(seeds_per_cell):
            rng = np.random.default_rng([seed, K, D, L, s])
            try:
                demand = Demand.random(K, D, L, field, rng, mode)
                query, state = gen_query(demand, rng, mode=mode)
                X = field.random(K, rng)
                Z = recover(answer(query, X, field), state)
                ok = np.array_equal(Z, demand.evaluate(X))
                last += state.i_star == layout.n + 1
                if not ok and failure is None:
                    failure = f"seed {s}: decoded {Z.tolist()} != {demand.evaluate(X).tolist()}"
            except IpltError as exc:
                ok = False
                if failure is None:
                    failure = f"seed {s}: {type(exc).__name__}: {exc}"
            passed += ok
        cells.append(FuzzCell(K, D, L, layout.case, seeds_per_cell, passed, last, failure))
    return FuzzReport(cells)
