"""Line-delimited JSON messages between client and server.

Every message is one UTF-8 JSON object terminated by a newline, tagged by
``type``: ``hello`` (server greeting, ``p`` and ``k``), ``query`` (``p``,
``k``, ``rows``, ``cols``, row-major ``g``, 1-indexed ``pi``), ``answer``
(``y``) or ``error`` (``code``, ``detail``).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import BinaryIO, Union

from .errors import IpltError

MAX_LINE_BYTES = 16 * 1024 * 1024

BAD_JSON = "BAD_JSON"
BAD_MESSAGE = "BAD_MESSAGE"
BAD_SHAPE = "BAD_SHAPE"
BAD_VALUE = "BAD_VALUE"
BAD_PERMUTATION = "BAD_PERMUTATION"
FIELD_MISMATCH = "FIELD_MISMATCH"
SIZE_MISMATCH = "SIZE_MISMATCH"
INTERNAL = "INTERNAL"


class WireError(IpltError):
    def __init__(self, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail


@dataclass(frozen=True)
class Hello:
    p: int
    k: int


@dataclass(frozen=True)
class QueryMessage:
    p: int
    k: int
    rows: int
    cols: int
    g: tuple[int, ...]
    pi: tuple[int, ...]


@dataclass(frozen=True)
class AnswerMessage:
    y: tuple[int, ...]


@dataclass(frozen=True)
class ErrorMessage:
    code: str
    detail: str


Message = Union[Hello, QueryMessage, AnswerMessage, ErrorMessage]

_TYPES = {"hello": Hello, "query": QueryMessage, "answer": AnswerMessage, "error": ErrorMessage}
_TAGS = {cls: tag for tag, cls in _TYPES.items()}
_INT_FIELDS = {"p", "k", "rows", "cols"}
_LIST_FIELDS = {"g", "pi", "y"}


def encode(msg: Message) -> bytes:
    data = {"type": _TAGS[type(msg)], **asdict(msg)}
    for key in _LIST_FIELDS & data.keys():
        data[key] = list(data[key])
    return (json.dumps(data, separators=(",", ":"), sort_keys=True) + "\n").encode("utf-8")


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def decode(line: bytes | str) -> Message:
    """Parse one line; raises ``WireError`` with BAD_JSON or BAD_MESSAGE."""
    try:
        data = json.loads(line)
    except (ValueError, UnicodeDecodeError) as exc:
        raise WireError(BAD_JSON, f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise WireError(BAD_JSON, "message must be a JSON object")
    tag = data.pop("type", None)
    cls = _TYPES.get(tag) if isinstance(tag, str) else None
    if cls is None:
        raise WireError(BAD_MESSAGE, f"unknown message type {tag!r}")
    expected = set(cls.__dataclass_fields__)
    if set(data) != expected:
        missing = sorted(expected - set(data))
        extra = sorted(set(data) - expected)
        raise WireError(BAD_MESSAGE, f"{tag}: missing {missing}, unexpected {extra}")
    for key, value in data.items():
        if key in _INT_FIELDS and not _is_int(value):
            raise WireError(BAD_MESSAGE, f"{tag}.{key} must be an integer")
        if key in _LIST_FIELDS:
            if not isinstance(value, list) or not all(_is_int(v) for v in value):
                raise WireError(BAD_MESSAGE, f"{tag}.{key} must be a list of integers")
            data[key] = tuple(value)
        if key in ("code", "detail") and not isinstance(value, str):
            raise WireError(BAD_MESSAGE, f"{tag}.{key} must be a string")
    return cls(**data)


def read_message(stream: BinaryIO) -> Message | None:
    """Next message from a binary stream, or None at end of stream."""
    line = stream.readline(MAX_LINE_BYTES + 1)
    if not line:
        return None
    if len(line) > MAX_LINE_BYTES:
        raise WireError(BAD_MESSAGE, "line exceeds the size limit")
    return decode(line)


def write_message(stream: BinaryIO, msg: Message) -> None:
    stream.write(encode(msg))
    stream.flush()
