"""TCP server answering queries against an in-memory dataset.

The server greets each connection with ``hello`` and then answers one
message per line.  It only learns D and L implicitly through the shape of a
query; validation uses the declared shape alone.
"""

from __future__ import annotations

import logging
import os
import socketserver
import threading

import numpy as np

from .dataset import Dataset
from .protocol import Query, answer
from .wire import (
    BAD_MESSAGE,
    BAD_PERMUTATION,
    BAD_SHAPE,
    BAD_VALUE,
    FIELD_MISMATCH,
    INTERNAL,
    MAX_LINE_BYTES,
    SIZE_MISMATCH,
    AnswerMessage,
    ErrorMessage,
    Hello,
    QueryMessage,
    WireError,
    decode,
    encode,
)

log = logging.getLogger(__name__)

LISTEN_ENV = "IPLT_LISTEN"
DEFAULT_ADDRESS = "127.0.0.1:7431"


def default_address() -> str:
    return os.environ.get(LISTEN_ENV, DEFAULT_ADDRESS)


def parse_address(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise ValueError(f"address must look like HOST:PORT, got {text!r}")
    return host or "127.0.0.1", int(port)


def handle_query(dataset: Dataset, msg: QueryMessage) -> AnswerMessage:
    """Validate a query against the dataset and compute its answer."""
    if msg.p != dataset.p:
        raise WireError(FIELD_MISMATCH, f"query is over F_{msg.p}, dataset over F_{dataset.p}")
    if msg.k != dataset.K:
        raise WireError(SIZE_MISMATCH, f"query expects {msg.k} messages, dataset has {dataset.K}")
    if msg.rows < 1 or msg.cols != dataset.K or len(msg.g) != msg.rows * msg.cols:
        raise WireError(BAD_SHAPE, f"g must be rows x {dataset.K} with rows >= 1 "
                                   f"(declared {msg.rows}x{msg.cols}, {len(msg.g)} entries)")
    if len(msg.pi) != dataset.K:
        raise WireError(BAD_PERMUTATION, f"pi has {len(msg.pi)} entries, expected {dataset.K}")
    if sorted(msg.pi) != list(range(1, dataset.K + 1)):
        raise WireError(BAD_PERMUTATION, f"pi is not a bijection on 1..{dataset.K}")
    G = np.array(msg.g, dtype=object)
    if ((G < 0) | (G >= dataset.p)).any():
        raise WireError(BAD_VALUE, f"entries of g must lie in [0, {dataset.p})")
    G = G.astype(np.int64).reshape(msg.rows, msg.cols)
    y = answer(Query(G, np.array(msg.pi, dtype=np.int64), dataset.p), dataset.X, dataset.field).y
    return AnswerMessage(tuple(int(v) for v in y))


def respond(dataset: Dataset, line: bytes) -> bytes:
    """Reply bytes for one request line.  Deterministic in (dataset, line)."""
    try:
        msg = decode(line)
        if not isinstance(msg, QueryMessage):
            raise WireError(BAD_MESSAGE, f"server only accepts queries, got {type(msg).__name__}")
        reply = handle_query(dataset, msg)
    except WireError as exc:
        reply = ErrorMessage(exc.code, exc.detail)
    except Exception as exc:  # never let a request kill the connection loop
        log.exception("unexpected failure while answering")
        reply = ErrorMessage(INTERNAL, f"{type(exc).__name__}: {exc}")
    return encode(reply)


class _Handler(socketserver.StreamRequestHandler):
    server: "PltServer"

    def handle(self) -> None:
        ds = self.server.dataset
        self.wfile.write(encode(Hello(ds.p, ds.K)))
        self.wfile.flush()
        while True:
            line = self.rfile.readline(MAX_LINE_BYTES + 1)
            if not line:
                return
            if len(line) > MAX_LINE_BYTES:
                self.wfile.write(encode(ErrorMessage(BAD_MESSAGE, "line exceeds the size limit")))
                return
            if not line.strip():
                continue
            self.wfile.write(respond(ds, line))
            self.wfile.flush()


class PltServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, dataset: Dataset, address: tuple[str, int]):
        self.dataset = dataset
        super().__init__(address, _Handler)

    @property
    def address(self) -> str:
        host, port = self.server_address[:2]
        return f"{host}:{port}"


def serve(dataset: Dataset, address: str, *, announce=print) -> None:
    """Serve forever on ``address`` (HOST:PORT; port 0 picks a free port)."""
    with PltServer(dataset, parse_address(address)) as srv:
        announce(f"serving {dataset.K} messages over F_{dataset.p} on {srv.address}")
        srv.serve_forever()


def start_background(dataset: Dataset, address: str = "127.0.0.1:0") -> PltServer:
    """Start a server on a daemon thread; call ``shutdown()`` and ``server_close()`` to stop."""
    srv = PltServer(dataset, parse_address(address))
    threading.Thread(target=srv.serve_forever, daemon=True).start()
    return srv
