"""Plain-text message store: line 1 is ``p K``, line 2 holds K residues."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidParameters
from .field import PrimeField


@dataclass(frozen=True)
class Dataset:
    p: int
    X: np.ndarray

    def __post_init__(self) -> None:
        PrimeField(self.p)
        X = np.asarray(self.X, dtype=np.int64).reshape(-1)
        if X.size == 0:
            raise InvalidParameters("dataset holds no messages")
        if (X < 0).any() or (X >= self.p).any():
            raise InvalidParameters(f"messages must be residues in [0, {self.p})")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)

    @property
    def K(self) -> int:
        return int(self.X.size)

    @property
    def field(self) -> PrimeField:
        return PrimeField(self.p)

    def dumps(self) -> str:
        return f"{self.p} {self.K}\n{' '.join(str(int(x)) for x in self.X)}\n"


def parse_dataset(text: str) -> Dataset:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2:
        raise InvalidParameters("dataset must have a header line and a message line")
    try:
        p, K = (int(tok) for tok in lines[0].split())
        X = [int(tok) for tok in lines[1].split()]
    except ValueError as exc:
        raise InvalidParameters(f"malformed dataset: {exc}") from exc
    if len(X) != K:
        raise InvalidParameters(f"header announces {K} messages, found {len(X)}")
    return Dataset(p, np.array(X, dtype=np.int64))


def read_dataset(path: str | Path) -> Dataset:
    return parse_dataset(Path(path).read_text(encoding="utf-8"))


def write_dataset(path: str | Path, dataset: Dataset) -> None:
    Path(path).write_text(dataset.dumps(), encoding="utf-8")


def generate_dataset(K: int, p: int, seed: int | None = None) -> Dataset:
    if K < 1:
        raise InvalidParameters("K must be positive")
    rng = np.random.default_rng(seed)
    return Dataset(p, PrimeField(p).random(K, rng))
