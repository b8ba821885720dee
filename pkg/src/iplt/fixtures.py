"""Two fully worked instances over F_13, one per construction case.

Instance 1 is K=20, D=8, L=3 (case I, demand embedded in the last block).
Instance 2 is K=20, D=6, L=3 (case II, demand embedded in the last block).
Every random choice is pinned, so a replay must reproduce every matrix
below bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .codes import generator_from_parity, parity_check
from .field import PrimeField
from .linalg import matmul
from .mds import is_mds
from .protocol import Demand, QueryFixtures, answer, gen_query, permute_messages, recover

F13 = PrimeField(13)

_V8 = [[7, 3, 12, 10, 2, 1, 5, 6],
       [3, 6, 5, 12, 8, 3, 11, 4],
       [5, 12, 1, 4, 6, 9, 6, 7]]


@dataclass(frozen=True)
class WorkedInstance:
    name: str
    K: int
    W: tuple[int, ...]
    V: list[list[int]]
    fixtures: QueryFixtures
    v_tilde: list[list[int]]
    G: list[list[int]]
    pi: dict[int, int]
    message_order: list[int]  # X~ = [X_{order[0]}, X_{order[1]}, ...]
    extra: dict[str, list[list[int]]] = dc_field(default_factory=dict)

    @property
    def D(self) -> int:
        return len(self.W)

    @property
    def L(self) -> int:
        return len(self.V)

    def demand(self) -> Demand:
        return Demand(self.K, self.W, np.array(self.V), F13)


def _block_diag(*blocks):
    rows = sum(len(b) for b in blocks)
    cols = sum(len(b[0]) for b in blocks)
    out = [[0] * cols for _ in range(rows)]
    r = c = 0
    for b in blocks:
        for i, row in enumerate(b):
            out[r + i][c:c + len(row)] = row
        r += len(b)
        c += len(b[0])
    return out


_G1_CASE1 = [[5, 8, 4, 7, 4, 3, 4, 2],
             [7, 4, 12, 9, 1, 10, 6, 5],
             [2, 2, 10, 6, 10, 3, 9, 6]]
_C1_CASE1 = [[1, 9, 11, 2], [7, 9, 2, 9], [10, 9, 11, 8]]
_LAST_CASE1 = [[2, 5, 9, 4, 10, 4, 7, 5, 0, 0, 0, 0],
               [1, 5, 4, 5, 4, 8, 2, 4, 0, 0, 0, 0],
               [7, 5, 9, 3, 12, 3, 8, 11, 0, 0, 0, 0],
               [2, 5, 9, 4, 0, 0, 0, 0, 4, 10, 2, 5],
               [1, 5, 4, 5, 0, 0, 0, 0, 10, 2, 7, 12],
               [7, 5, 9, 3, 0, 0, 0, 0, 12, 3, 5, 8]]

INSTANCE_1 = WorkedInstance(
    name="case I: K=20, D=8, L=3",
    K=20,
    W=(2, 4, 5, 7, 8, 10, 11, 12),
    V=_V8,
    fixtures=QueryFixtures(
        i_star=2,
        w_order=(10, 4, 8, 2, 7, 5, 11, 12),
        embedding=(2, 3),
        blocks={1: _G1_CASE1},
        omega=[[1], [1]],
        code_fill=_C1_CASE1,
        alpha={1: 2},
        c_first=4,
        pi_rest={1: 3, 3: 8, 6: 1, 9: 2, 13: 9, 14: 11, 15: 5, 16: 4,
                 17: 12, 18: 6, 19: 10, 20: 7},
    ),
    v_tilde=[[1, 3, 2, 7, 10, 12, 5, 6],
             [3, 6, 8, 3, 12, 5, 11, 4],
             [9, 12, 6, 5, 4, 1, 6, 7]],
    G=_block_diag(_G1_CASE1, _LAST_CASE1),
    pi={1: 3, 3: 8, 6: 1, 9: 2, 13: 9, 14: 11, 15: 5, 16: 4, 17: 12, 18: 6, 19: 10, 20: 7,
        10: 13, 4: 14, 8: 15, 2: 16, 7: 17, 5: 18, 11: 19, 12: 20},
    message_order=[6, 9, 1, 16, 15, 18, 20, 3, 13, 19, 14, 17, 10, 4, 8, 2, 7, 5, 11, 12],
    extra={"combiner": [[2, 4], [3, 9]], "alpha": [[1, 2], [2, 10], [3, 3]]},
)

_G1_CASE2 = [[11, 5, 3, 1, 4, 2], [7, 10, 2, 6, 6, 5], [8, 7, 10, 10, 9, 6]]
_G2_CASE2 = [[5, 8, 4, 7, 4, 3], [7, 4, 12, 9, 1, 10], [2, 2, 10, 6, 10, 3]]
_PARITY = [[12, 11, 3, 2, 5, 11], [10, 9, 12, 12, 6, 10], [4, 5, 9, 7, 2, 2]]
_EXTENDED = [[12, 4, 11, 3, 3, 2, 5, 11], [10, 7, 9, 12, 4, 12, 6, 10], [4, 9, 5, 9, 1, 7, 2, 2]]
_LAST_CASE2 = [[1, 4, 5, 9, 2, 8, 4, 11],
               [3, 7, 10, 10, 7, 9, 10, 10],
               [9, 9, 7, 1, 5, 2, 12, 2],
               [1, 6, 1, 4, 11, 12, 4, 3],
               [3, 4, 2, 3, 6, 7, 10, 11]]
_PI_CASE2 = {14: 1, 6: 2, 13: 3, 15: 4, 18: 5, 11: 6, 1: 7, 17: 8, 12: 9, 19: 10,
             20: 11, 16: 12, 10: 13, 3: 14, 4: 15, 8: 16, 9: 17, 2: 18, 7: 19, 5: 20}
_W_CASE2 = (10, 4, 8, 2, 7, 5)

INSTANCE_2 = WorkedInstance(
    name="case II: K=20, D=6, L=3",
    K=20,
    W=(2, 4, 5, 7, 8, 10),
    V=[row[:6] for row in _V8],
    fixtures=QueryFixtures(
        i_star=3,
        w_order=_W_CASE2,
        embedding=(1, 3, 4, 6, 7, 8),
        blocks={1: _G1_CASE2, 2: _G2_CASE2},
        parity=_PARITY,
        extended=_EXTENDED,
        pi_rest={l: c for l, c in _PI_CASE2.items() if l not in _W_CASE2},
    ),
    v_tilde=[[1, 3, 2, 7, 10, 12], [3, 6, 8, 3, 12, 5], [9, 12, 6, 5, 4, 1]],
    G=_block_diag(_G1_CASE2, _G2_CASE2, _LAST_CASE2),
    pi=_PI_CASE2,
    message_order=[14, 6, 13, 15, 18, 11, 1, 17, 12, 19, 20, 16, 10, 3, 4, 8, 9, 2, 7, 5],
    extra={"parity": _PARITY, "extended": _EXTENDED, "last_block": _LAST_CASE2,
           "recovery": [[11, 11, 1, 0, 0], [0, 11, 11, 1, 0], [0, 0, 11, 11, 1]]},
)

INSTANCES = {1: INSTANCE_1, 2: INSTANCE_2}


@dataclass
class ReplayReport:
    checks: list[tuple[str, bool]]

    @property
    def ok(self) -> bool:
        return all(passed for _, passed in self.checks)

    def lines(self) -> list[str]:
        return [f"{'PASS' if passed else 'FAIL'}  {label}" for label, passed in self.checks]


def replay(number: int, *, samples: int = 100, seed: int = 0) -> ReplayReport:
    """Regenerate a worked instance from its fixtures and compare every matrix."""
    inst = INSTANCES[number]
    F = F13
    demand = inst.demand()
    query, state = gen_query(demand, np.random.default_rng(seed), fixtures=inst.fixtures)
    checks = [
        ("demand matrix is MDS", is_mds(demand.V, F)),
        ("permuted demand matrix", np.array_equal(state.v_tilde, inst.v_tilde)),
        (f"G ({len(inst.G)}x{inst.K})", np.array_equal(query.G, inst.G)),
        ("permutation images", all(int(query.pi[l - 1]) == c for l, c in inst.pi.items())),
    ]
    X = np.arange(1, inst.K + 1)
    checks.append(("permuted message order",
                   np.array_equal(permute_messages(query.pi, X), inst.message_order)))

    if "combiner" in inst.extra:
        checks.append(("combiner scalars", state.combiner == {k: v for k, v in inst.extra["combiner"]}))
        checks.append(("block scalars", all(int(state.alpha[j - 1]) == a for j, a in inst.extra["alpha"])))
    if "recovery" in inst.extra:
        V_t = F(inst.v_tilde)
        target = F.zeros((inst.L, inst.D + inst.K % inst.D))
        target[:, [h - 1 for h in inst.fixtures.embedding]] = V_t
        last = F(inst.extra["last_block"])
        checks.append(("reference recovery matrix isolates the demand",
                       np.array_equal(matmul(inst.extra["recovery"], last, F), target)))
        checks.append(("derived recovery matrix equals the reference one",
                       np.array_equal(state.recovery, inst.extra["recovery"])))
        checks.append(("parity-check matrix derived from demand",
                       np.array_equal(parity_check(V_t, F), inst.extra["parity"])))
        checks.append(("last block derived from extension",
                       np.array_equal(generator_from_parity(inst.extra["extended"], F), last)))

    rng = np.random.default_rng(seed + 1)
    good = 0
    for _ in range(samples):
        Xs = F.random(inst.K, rng)
        Z = recover(answer(query, Xs, F), state)
        good += np.array_equal(Z, demand.evaluate(Xs)) and np.array_equal(
            Z, matmul(inst.v_tilde, Xs[np.array(inst.fixtures.w_order) - 1], F))
    checks.append((f"recovery on {samples} random message vectors", good == samples))
    return ReplayReport(checks)
