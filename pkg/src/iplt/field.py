"""Prime field F_p with residues stored as int64 numpy arrays."""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

import numpy as np

from .errors import InvalidParameters, InversionOfZero

MAX_MODULUS = 2**31


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    for d in range(3, isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


@dataclass(frozen=True)
class PrimeField:
    """The field of residues modulo a prime ``p`` (``p < 2**31``).

    Calling the field on array-like data returns a reduced int64 array, so
    ``F([[1, -1]])`` gives ``[[1, p - 1]]``.
    """

    p: int

    def __post_init__(self) -> None:
        if not isinstance(self.p, (int, np.integer)) or isinstance(self.p, bool):
            raise InvalidParameters(f"modulus must be an integer, got {self.p!r}")
        object.__setattr__(self, "p", int(self.p))
        if self.p >= MAX_MODULUS:
            raise InvalidParameters(f"modulus {self.p} must be below 2**31")
        if not is_prime(self.p):
            raise InvalidParameters(f"{self.p} is not prime")

    def __call__(self, values) -> np.ndarray:
        arr = np.asarray(values)
        if arr.dtype.kind not in "iub":
            if arr.size and not np.all(np.mod(arr, 1) == 0):
                raise InvalidParameters("field elements must be integers")
        return np.mod(arr.astype(np.int64), self.p)

    def zeros(self, shape) -> np.ndarray:
        return np.zeros(shape, dtype=np.int64)

    def identity(self, n: int) -> np.ndarray:
        return np.eye(n, dtype=np.int64)

    def random(self, shape, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self.p, size=shape, dtype=np.int64)

    def random_nonzero(self, shape, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(1, self.p, size=shape, dtype=np.int64)

    def inv(self, a: int) -> int:
        return field_inv(a, self)

    def inv_array(self, values) -> np.ndarray:
        """Elementwise inverse with 0 mapped to 0 (callers mask zeros)."""
        return pow_array(self(values), self.p - 2, self.p)


def field_inv(a: int, field: PrimeField) -> int:
    """Multiplicative inverse of ``a`` modulo ``field.p``."""
    a = int(a) % field.p
    if a == 0:
        raise InversionOfZero(f"0 has no inverse modulo {field.p}")
    return pow(a, -1, field.p)


def pow_array(base: np.ndarray, exponent: int, p: int) -> np.ndarray:
    """Vectorised square-and-multiply; entries of ``base`` must be reduced."""
    result = np.ones_like(base, dtype=np.int64)
    b = base.astype(np.int64, copy=True)
    e = int(exponent)
    while e:
        if e & 1:
            result = result * b % p
        b = b * b % p
        e >>= 1
    return result
