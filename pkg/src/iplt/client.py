"""Client side of a retrieval session over TCP."""

from __future__ import annotations

import socket
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .capacity import CapacityBounds, compute_bounds
from .errors import InvalidParameters, IpltError
from .field import PrimeField
from .protocol import Answer, Demand, gen_query, recover
from .mds import sample_mds
from .server import parse_address
from .wire import AnswerMessage, ErrorMessage, Hello, QueryMessage, read_message, write_message


class ServiceError(IpltError):
    def __init__(self, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail


@dataclass(frozen=True)
class RetrievalResult:
    Z: np.ndarray
    demand: Demand
    rows: int
    download: int
    bounds: CapacityBounds

    @property
    def rate(self) -> Fraction:
        return Fraction(self.demand.L, self.download)

    def summary(self) -> list[str]:
        d = self.demand
        return [
            f"Z = {' '.join(str(int(z)) for z in self.Z)}",
            f"K={d.K} D={d.D} L={d.L} p={d.field.p}",
            f"download = {self.download} symbols (rows of G = {self.rows})",
            f"rate = {self.rate}  lower = {self.bounds.lower}  upper = {self.bounds.upper}",
        ]


def _prepare(W: Sequence[int], V, L: int | None) -> tuple[list[int], np.ndarray | None, int]:
    W = [int(w) for w in W]
    if not W or len(set(W)) != len(W) or min(W) < 1:
        raise InvalidParameters("W must list distinct positive message indices")
    if V is not None:
        V = np.asarray(V, dtype=np.int64)
        if V.ndim != 2 or V.shape[1] != len(W):
            raise InvalidParameters(f"V has shape {V.shape} but |W| = {len(W)}")
        order = np.argsort(W)
        return sorted(W), V[:, order], V.shape[0]
    if L is None or not 1 <= L <= len(W):
        raise InvalidParameters(f"need 1 <= L <= |W| = {len(W)} for a random coefficient matrix")
    return sorted(W), None, L


def retrieve(address: str, W: Sequence[int], V=None, *, L: int | None = None,
             seed: int | None = None, mode: str = "grs", timeout: float = 10.0) -> RetrievalResult:
    """Run one session: fetch ``hello``, send a query, decode the answer.

    Pass ``V`` (columns in the order of ``W``) or ``L`` for a random MDS matrix.
    Parameter problems raise ``InvalidParameters`` before any network I/O.
    """
    W_sorted, V_sorted, L = _prepare(W, V, L)
    rng = np.random.default_rng(seed)
    host, port = parse_address(address)
    with socket.create_connection((host, port), timeout=timeout) as sock:
        stream = sock.makefile("rwb")
        hello = read_message(stream)
        if not isinstance(hello, Hello):
            raise ServiceError("BAD_MESSAGE", f"expected hello, got {hello!r}")
        field = PrimeField(hello.p)
        if V_sorted is None:
            V_sorted = sample_mds(L, len(W_sorted), field, rng, mode)
        demand = Demand(hello.k, tuple(W_sorted), V_sorted, field)
        query, state = gen_query(demand, rng, mode=mode)
        write_message(stream, QueryMessage(
            p=field.p, k=demand.K, rows=query.rows, cols=query.K,
            g=tuple(int(v) for v in query.G.reshape(-1)), pi=tuple(int(v) for v in query.pi)))
        reply = read_message(stream)
    if isinstance(reply, ErrorMessage):
        raise ServiceError(reply.code, reply.detail)
    if not isinstance(reply, AnswerMessage):
        raise ServiceError("BAD_MESSAGE", f"expected answer, got {reply!r}")
    if len(reply.y) != query.rows:
        raise ServiceError("BAD_SHAPE", f"answer has {len(reply.y)} entries, expected {query.rows}")
    Z = recover(Answer(np.array(reply.y, dtype=np.int64)), state)
    return RetrievalResult(Z, demand, query.rows, len(reply.y), compute_bounds(demand.K, demand.D, demand.L))
