"""Single-server private linear transformation with individual privacy.

The user wants ``Z = V X_W``: L combinations of the D messages indexed by W
out of K messages held by the server.  The query is a block-diagonal matrix G
together with a permutation pi of the message indices; the server returns
``y = G X~`` where ``X~[pi(l)] = X[l]``.

Layout: with R = K mod D and S = gcd(D + R, R), the first n = floor(K/D) - 1
blocks are L x D, and the last block spans the remaining D + R columns.

* Case I (L <= S): the last block is split into t + m column blocks of width
  S, where t = D/S - 1 and m = R/S + 1.  It has L*m rows arranged so that one
  fixed combination of its row blocks cancels every column block except the
  t + 1 holding demand data (Cauchy-weighted interference alignment).
* Case II (L > S): the last block is an (L + R) x (D + R) MDS generator whose
  row space contains the demand rows on a random D-subset of columns.

Message indices, block indices, permutation images and the embedding
subsets are 1-based, as on the wire.  Matrix slices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Literal, Mapping, Sequence

import numpy as np

from .capacity import remainder_and_granularity, validate_params
from .codes import embed_mds_generator, extend_pinned_mds
from .errors import (
    DegeneratePoints,
    FieldTooSmall,
    InvalidParameters,
    RankError,
    ShapeError,
    StateError,
)
from .field import PrimeField, field_inv
from .linalg import matmul, solve, solve_left
from .mds import cauchy_matrix, is_mds, sample_mds

SamplerMode = Literal["grs", "uniform-rejection"]


@dataclass(frozen=True)
class BlockLayout:
    K: int
    D: int
    L: int
    R: int
    S: int
    case: int
    n: int
    t: int | None
    m: int | None
    last_rows: int

    @property
    def last_cols(self) -> int:
        return self.D + self.R

    @property
    def rows(self) -> int:
        return self.L * self.n + self.last_rows

    @property
    def num_blocks(self) -> int:
        return self.n + 1

    @property
    def column_spans(self) -> list[tuple[int, int]]:
        """1-based inclusive column range of every block."""
        spans = [(i * self.D + 1, (i + 1) * self.D) for i in range(self.n)]
        return spans + [(self.n * self.D + 1, self.K)]

    @property
    def row_spans(self) -> list[tuple[int, int]]:
        spans = [(i * self.L + 1, (i + 1) * self.L) for i in range(self.n)]
        return spans + [(self.n * self.L + 1, self.rows)]

    def block_of_column(self, col: int) -> int:
        """1-based block index holding 1-based column ``col``."""
        return min((col - 1) // self.D, self.n) + 1


def make_layout(K: int, D: int, L: int) -> BlockLayout:
    validate_params(K, D, L)
    R, S = remainder_and_granularity(K, D)
    n = K // D - 1
    if L <= S:
        t, m = D // S - 1, R // S + 1
        return BlockLayout(K, D, L, R, S, 1, n, t, m, L * m)
    return BlockLayout(K, D, L, R, S, 2, n, None, None, L + R)


@dataclass(frozen=True)
class Demand:
    """Demand support ``W`` (sorted, 1-based) and MDS coefficients ``V`` (L x D)."""

    K: int
    W: tuple[int, ...]
    V: np.ndarray
    field: PrimeField
    check_mds: bool = dc_field(default=True, repr=False, compare=False)

    def __post_init__(self) -> None:
        W = tuple(int(w) for w in self.W)
        if list(W) != sorted(set(W)):
            raise InvalidParameters("W must be strictly increasing")
        if not W or W[0] < 1 or W[-1] > self.K:
            raise InvalidParameters(f"W must be a nonempty subset of 1..{self.K}")
        V = self.field(self.V)
        if V.ndim != 2 or V.shape[1] != len(W) or V.shape[0] < 1:
            raise InvalidParameters(f"V must be L x {len(W)}, got shape {V.shape}")
        validate_params(self.K, len(W), V.shape[0])
        if self.check_mds and not is_mds(V, self.field):
            raise InvalidParameters("V is not MDS")
        V.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "V", V)

    @property
    def D(self) -> int:
        return len(self.W)

    @property
    def L(self) -> int:
        return self.V.shape[0]

    def evaluate(self, X) -> np.ndarray:
        """Direct evaluation of ``V X_W``."""
        X = self.field(X)
        return matmul(self.V, X[np.array(self.W) - 1], self.field)

    @classmethod
    def random(cls, K: int, D: int, L: int, field: PrimeField, rng: np.random.Generator,
               mode: SamplerMode = "grs") -> "Demand":
        validate_params(K, D, L)
        W = tuple(sorted(int(w) + 1 for w in rng.choice(K, D, replace=False)))
        return cls(K, W, sample_mds(L, D, field, rng, mode), field, check_mds=False)


@dataclass(frozen=True)
class QueryFixtures:
    """Values injected in place of random draws (replay and testing).

    ``embedding`` is the set I of column blocks (case I) or the D-subset h of
    last-block columns (case II).  ``code_fill`` holds the columns of the
    case I code matrix that carry no demand data, left to right (all of it
    in the decoy branch).  ``alpha`` maps block index to a scalar and is only
    consulted for scalars the alignment leaves free.
    """

    i_star: int | None = None
    w_order: Sequence[int] | None = None
    embedding: Sequence[int] | None = None
    pi_rest: Mapping[int, int] | None = None
    blocks: Mapping[int, object] | None = None
    omega: object | None = None
    code_fill: object | None = None
    alpha: Mapping[int, int] | None = None
    c_first: int | None = None
    parity: object | None = None
    extended: object | None = None
    last_block: object | None = None


NO_FIXTURES = QueryFixtures()


@dataclass(frozen=True)
class Query:
    G: np.ndarray
    pi: np.ndarray  # pi[l - 1] = image of message l, 1-based
    p: int

    @property
    def rows(self) -> int:
        return self.G.shape[0]

    @property
    def K(self) -> int:
        return self.G.shape[1]


@dataclass(frozen=True)
class Answer:
    y: np.ndarray


@dataclass(frozen=True)
class ClientState:
    """Everything the user keeps private to decode the answer.

    Only the fields of the branch that was taken are set.
    """

    layout: BlockLayout
    p: int
    i_star: int
    w_tilde: tuple[int, ...]
    v_tilde: np.ndarray
    embedding: tuple[int, ...] | None = None
    combiner: dict[int, int] | None = None
    alpha: np.ndarray | None = None
    omega: np.ndarray | None = None
    recovery: np.ndarray | None = None

    @property
    def embedded_split(self) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
        """Case I: (I_1, I_2, complement of I in 1..t)."""
        if self.layout.case != 1 or self.embedding is None:
            raise StateError("split only exists for the case I demand branch")
        return split_embedding(self.embedding, self.layout.t)


@dataclass(frozen=True)
class QueryStructure:
    """The combinatorial part of a query: block choice, ordering, permutation."""

    i_star: int
    w_tilde: tuple[int, ...]
    embedding: tuple[int, ...] | None
    pi: np.ndarray


@dataclass(frozen=True)
class LastBlock:
    matrix: np.ndarray
    code: np.ndarray | None = None
    alpha: np.ndarray | None = None
    omega: np.ndarray | None = None
    combiner: dict[int, int] | None = None
    recovery: np.ndarray | None = None


def select_block(layout: BlockLayout, rng: np.random.Generator) -> int:
    """Each of the first n blocks w.p. D/K, the last one w.p. (D + R)/K."""
    u = int(rng.integers(0, layout.K))
    return min(u // layout.D, layout.n) + 1


def choose_embedding(layout: BlockLayout, rng: np.random.Generator) -> tuple[int, ...]:
    """Uniform subset: t + 1 of the t + m column blocks, or D of the D + R columns."""
    if layout.case == 1:
        pool, size = layout.t + layout.m, layout.t + 1
    else:
        pool, size = layout.D + layout.R, layout.D
    return tuple(sorted(int(i) + 1 for i in rng.permutation(pool)[:size]))


def split_embedding(embedding: Sequence[int], t: int):
    first = tuple(i for i in embedding if i <= t)
    second = tuple(i for i in embedding if i > t)
    missing = tuple(j for j in range(1, t + 1) if j not in set(embedding))
    return first, second, missing


def demand_images(layout: BlockLayout, i_star: int, embedding: Sequence[int] | None) -> list[int]:
    """Column (1-based) receiving the j-th element of the ordered demand support."""
    D, n = layout.D, layout.n
    if i_star <= n:
        return [(i_star - 1) * D + j for j in range(1, D + 1)]
    if embedding is None:
        raise StateError("the last-block branch needs an embedding")
    if layout.case == 1:
        S = layout.S
        return [n * D + (embedding[(j - 1) // S] - 1) * S + (j - 1) % S + 1 for j in range(1, D + 1)]
    return [n * D + h for h in embedding]


def build_permutation(layout: BlockLayout, i_star: int, w_tilde: Sequence[int],
                      embedding: Sequence[int] | None, rng: np.random.Generator,
                      *, rest: Mapping[int, int] | None = None) -> np.ndarray:
    """Permutation sending the demand to its columns and the rest uniformly at random."""
    K = layout.K
    if len(w_tilde) != layout.D:
        raise InvalidParameters(f"demand support must have {layout.D} indices")
    pi = [0] * K
    targets = demand_images(layout, i_star, embedding)
    for l, col in zip(w_tilde, targets):
        pi[l - 1] = col
    taken = set(targets)
    others = [l for l in range(1, K + 1) if not pi[l - 1]]
    unused = [c for c in range(1, K + 1) if c not in taken]
    if rest is None:
        for l, k in zip(others, rng.permutation(len(unused))):
            pi[l - 1] = unused[k]
    else:
        if set(rest) != set(others) or sorted(rest.values()) != unused:
            raise InvalidParameters("injected permutation does not complete the demand images")
        for l, col in rest.items():
            pi[l - 1] = int(col)
    pi = np.array(pi, dtype=np.int64)
    return pi


def sample_structure(layout: BlockLayout, W: Sequence[int], rng: np.random.Generator,
                     fixtures: QueryFixtures = NO_FIXTURES) -> QueryStructure:
    """Draw i*, the demand ordering, the embedding subset and pi, in that order."""
    i_star = fixtures.i_star if fixtures.i_star is not None else select_block(layout, rng)
    if not 1 <= i_star <= layout.n + 1:
        raise InvalidParameters(f"block index {i_star} outside 1..{layout.n + 1}")
    if fixtures.w_order is not None:
        w_tilde = tuple(int(w) for w in fixtures.w_order)
        if sorted(w_tilde) != sorted(W):
            raise InvalidParameters("injected ordering is not a permutation of W")
    else:
        w_tilde = tuple(int(w) for w in rng.permutation(np.asarray(W, dtype=np.int64)))
    embedding = None
    if i_star == layout.n + 1:
        if fixtures.embedding is not None:
            embedding = tuple(sorted(int(i) for i in fixtures.embedding))
        else:
            embedding = choose_embedding(layout, rng)
    pi = build_permutation(layout, i_star, w_tilde, embedding, rng, rest=fixtures.pi_rest)
    return QueryStructure(i_star, w_tilde, embedding, pi)


def solve_alignment(embedding: Sequence[int], omega, field: PrimeField, rng: np.random.Generator,
                    *, c_first: int | None = None, alpha_free: Mapping[int, int] | None = None):
    """Combiner scalars c and block scalars alpha for the case I last block.

    With I_2 = {k_1 < ... < k_s} the embedded blocks beyond t, the combiner
    sum_l c_{k_l} (row block k_l - t) must cancel every column block j <= t
    outside I and return coefficient 1 on every block of I.  Cancellation
    is the square-ish system ``sum_l c_{k_l} omega[k_l - t, j] = 0`` with
    c_{k_1} drawn at random; the unit coefficients fix alpha on I.

    Returns ``(c, alpha)`` with c a dict k -> c_k and alpha indexed by block - 1.
    """
    omega = field(omega)
    m, t = omega.shape
    I = tuple(sorted(int(i) for i in embedding))
    if len(I) != t + 1 or len(set(I)) != t + 1 or I[0] < 1 or I[-1] > t + m:
        raise InvalidParameters(f"embedding must be {t + 1} distinct blocks in 1..{t + m}")
    first, second, missing = split_embedding(I, t)
    p = field.p
    c1 = int(c_first) % p if c_first is not None else int(field.random_nonzero((), rng))
    if c1 == 0:
        raise InvalidParameters("the leading combiner scalar must be nonzero")
    c = np.zeros(len(second), dtype=np.int64)
    c[0] = c1
    if missing:
        M1 = omega[np.ix_([k - t - 1 for k in second], [j - 1 for j in missing])].T
        try:
            c[1:] = solve(M1[:, 1:], (-M1[:, 0] * c1) % p, field)
        except RankError as exc:
            raise DegeneratePoints("alignment system is singular; omega is not super-regular") from exc
        if matmul(M1, c, field).any():
            raise DegeneratePoints("alignment system has no exact solution")
    if (c == 0).any():
        raise DegeneratePoints("alignment produced a zero combiner scalar")
    combiner = {k: int(v) for k, v in zip(second, c)}

    alpha = np.zeros(t + m, dtype=np.int64)
    for k, v in combiner.items():
        alpha[k - 1] = field_inv(v, field)
    for i in first:
        total = sum(v * int(omega[k - t - 1, i - 1]) for k, v in combiner.items()) % p
        if total == 0:
            raise DegeneratePoints(f"block {i} would be cancelled by the combiner")
        alpha[i - 1] = field_inv(total, field)
    determined = set(first) | set(second)
    for j in range(1, t + m + 1):
        if j in determined:
            if alpha_free and j in alpha_free and int(alpha_free[j]) % p != alpha[j - 1]:
                raise InvalidParameters(f"alpha for block {j} is fixed by the alignment")
            continue
        if alpha_free and j in alpha_free:
            alpha[j - 1] = int(alpha_free[j]) % p
        else:
            alpha[j - 1] = int(field.random_nonzero((), rng))
    if (alpha == 0).any():
        raise InvalidParameters("block scalars must be nonzero")
    return combiner, alpha


def _case1_matrix(code: np.ndarray, alpha: np.ndarray, omega: np.ndarray, L: int, S: int,
                  t: int, m: int, field: PrimeField) -> np.ndarray:
    p = field.p
    G = field.zeros((m * L, (t + m) * S))
    for r in range(m):
        rows = slice(r * L, (r + 1) * L)
        for j in range(t):
            G[rows, j * S:(j + 1) * S] = code[:, j * S:(j + 1) * S] * (int(alpha[j]) * int(omega[r, j]) % p) % p
        j = t + r
        G[rows, j * S:(j + 1) * S] = code[:, j * S:(j + 1) * S] * int(alpha[j]) % p
    return G


def build_last_block_case1(layout: BlockLayout, v_tilde, embedding: Sequence[int] | None,
                           field: PrimeField, rng: np.random.Generator, *,
                           mode: SamplerMode = "grs",
                           fixtures: QueryFixtures = NO_FIXTURES) -> LastBlock:
    """Case I last block; ``v_tilde=None`` selects the decoy branch."""
    if layout.case != 1:
        raise InvalidParameters("case I construction on a case II layout")
    L, S, t, m = layout.L, layout.S, layout.t, layout.m
    width = (t + m) * S
    if fixtures.omega is not None:
        omega = field(fixtures.omega).reshape(m, t)
    else:
        pts = rng.choice(field.p, size=t + m, replace=False)
        omega = cauchy_matrix(pts[:m], pts[m:], field)

    if v_tilde is None:
        if fixtures.code_fill is not None:
            code = field(fixtures.code_fill)
            if code.shape != (L, width):
                raise ShapeError(f"decoy code must be {L}x{width}")
        else:
            code = sample_mds(L, width, field, rng, mode)
        alpha = np.array([int((fixtures.alpha or {}).get(j, 0)) % field.p or int(field.random_nonzero((), rng))
                          for j in range(1, t + m + 1)], dtype=np.int64)
        return LastBlock(_case1_matrix(code, alpha, omega, L, S, t, m, field), code=code, alpha=alpha, omega=omega)

    V = field(v_tilde)
    I = tuple(sorted(int(i) for i in embedding))
    positions = [(i - 1) * S + f for i in I for f in range(S)]
    code = extend_pinned_mds(V, width, positions, field, rng, free_columns=fixtures.code_fill)
    combiner, alpha = solve_alignment(I, omega, field, rng, c_first=fixtures.c_first, alpha_free=fixtures.alpha)
    G = _case1_matrix(code, alpha, omega, L, S, t, m, field)
    return LastBlock(G, code=code, alpha=alpha, omega=omega, combiner=combiner)


def build_last_block_case2(layout: BlockLayout, v_tilde, embedding: Sequence[int] | None,
                           field: PrimeField, rng: np.random.Generator, *,
                           mode: SamplerMode = "grs",
                           fixtures: QueryFixtures = NO_FIXTURES) -> LastBlock:
    """Case II last block; ``v_tilde=None`` selects the decoy branch."""
    if layout.case != 2:
        raise InvalidParameters("case II construction on a case I layout")
    rows, cols = layout.L + layout.R, layout.D + layout.R
    if v_tilde is None:
        if fixtures.last_block is not None:
            G = field(fixtures.last_block)
            if G.shape != (rows, cols):
                raise ShapeError(f"decoy last block must be {rows}x{cols}")
        else:
            G = sample_mds(rows, cols, field, rng, mode)
        return LastBlock(G)
    V = field(v_tilde)
    h = [int(x) - 1 for x in embedding]
    G = embed_mds_generator(V, cols, h, field, rng, parity=fixtures.parity, extended=fixtures.extended)
    target = field.zeros((layout.L, cols))
    target[:, h] = V
    E = solve_left(G, target, field)
    if not np.array_equal(matmul(E, G, field), target):
        raise RankError("demand rows are not in the row space of the last block")
    return LastBlock(G, recovery=E)


def _block_diag(blocks: list[np.ndarray], field: PrimeField) -> np.ndarray:
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    G = field.zeros((rows, cols))
    r = c = 0
    for b in blocks:
        G[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return G


def gen_query(demand: Demand, rng: np.random.Generator, *, mode: SamplerMode = "grs",
              fixtures: QueryFixtures = NO_FIXTURES) -> tuple[Query, ClientState]:
    """Build the query (G, pi) and the private state needed to decode.

    ``rng`` is split into two child streams: the first drives the structure
    (block choice, demand ordering, embedding subset, permutation fill) via
    ``sample_structure``, the second every matrix and scalar.
    """
    field = demand.field
    layout = make_layout(demand.K, demand.D, demand.L)
    if field.p <= layout.D + layout.R:
        raise FieldTooSmall(f"need p > D + R = {layout.D + layout.R}, got p = {field.p}")
    structure_rng, coeff_rng = rng.spawn(2)
    st = sample_structure(layout, demand.W, structure_rng, fixtures)

    col_of = {w: j for j, w in enumerate(demand.W)}
    v_tilde = demand.V[:, [col_of[w] for w in st.w_tilde]]

    blocks = []
    injected = fixtures.blocks or {}
    for i in range(1, layout.n + 1):
        if i == st.i_star:
            blocks.append(v_tilde)
        elif i in injected:
            b = field(injected[i])
            if b.shape != (layout.L, layout.D):
                raise ShapeError(f"injected block {i} must be {layout.L}x{layout.D}")
            blocks.append(b)
        else:
            blocks.append(sample_mds(layout.L, layout.D, field, coeff_rng, mode))

    in_last = st.i_star == layout.n + 1
    build = build_last_block_case1 if layout.case == 1 else build_last_block_case2
    last = build(layout, v_tilde if in_last else None, st.embedding, field, coeff_rng,
                 mode=mode, fixtures=fixtures)
    blocks.append(last.matrix)

    G = _block_diag(blocks, field)
    G.setflags(write=False)
    query = Query(G=G, pi=st.pi, p=field.p)
    state = ClientState(
        layout=layout,
        p=field.p,
        i_star=st.i_star,
        w_tilde=st.w_tilde,
        v_tilde=v_tilde,
        embedding=st.embedding,
        combiner=last.combiner if in_last else None,
        alpha=last.alpha if in_last and layout.case == 1 else None,
        omega=last.omega if in_last and layout.case == 1 else None,
        recovery=last.recovery if in_last else None,
    )
    return query, state


def check_permutation(pi, K: int) -> np.ndarray:
    arr = np.asarray(pi, dtype=np.int64).reshape(-1)
    if arr.size != K or not np.array_equal(np.sort(arr), np.arange(1, K + 1)):
        raise InvalidParameters(f"pi must be a bijection on 1..{K}")
    return arr


def permute_messages(pi, X) -> np.ndarray:
    """``X~`` with ``X~[pi(l)] = X[l]``."""
    X = np.asarray(X, dtype=np.int64)
    Xt = np.empty_like(X)
    Xt[np.asarray(pi) - 1] = X
    return Xt


def answer(query: Query, X, field: PrimeField | None = None) -> Answer:
    """Server side: ``y = G X~``."""
    field = field or PrimeField(query.p)
    X = field(X).reshape(-1)
    if query.G.ndim != 2 or query.G.shape[1] != X.size:
        raise ShapeError(f"query has {query.G.shape[-1]} columns but there are {X.size} messages")
    try:
        pi = check_permutation(query.pi, X.size)
    except InvalidParameters as exc:
        raise ShapeError(str(exc)) from exc
    return Answer(matmul(query.G, permute_messages(pi, X), field))


def recover(ans: Answer, state: ClientState) -> np.ndarray:
    """Decode ``Z = V X_W`` from the answer."""
    lay = state.layout
    field = PrimeField(state.p)
    y = field(ans.y).reshape(-1)
    if y.size != lay.rows:
        raise StateError(f"answer has {y.size} entries, layout expects {lay.rows}")
    L = lay.L
    if state.i_star <= lay.n:
        return y[(state.i_star - 1) * L:state.i_star * L].copy()
    y_last = y[lay.n * L:]
    if lay.case == 1:
        if not state.combiner:
            raise StateError("case I state is missing its combiner")
        Z = field.zeros(L)
        for k, c in state.combiner.items():
            r = k - lay.t - 1
            Z = (Z + c * y_last[r * L:(r + 1) * L]) % field.p
        return Z
    if state.recovery is None:
        raise StateError("case II state is missing its recovery matrix")
    return matmul(state.recovery, y_last, field)
