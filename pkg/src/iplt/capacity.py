"""Rate bounds for single-server private linear transformation.

Parameters throughout: K messages, a demand supported on D of them, and L
independent combinations requested.  R = K mod D and S = gcd(D + R, R), with
gcd(x, 0) = x so that R = 0 gives S = D.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

from .errors import InstanceTooLarge, InvalidParameters

ILP_MAX_K = 40


def validate_params(K: int, D: int, L: int) -> None:
    for name, v in (("K", K), ("D", D), ("L", L)):
        if not isinstance(v, int) or isinstance(v, bool):
            raise InvalidParameters(f"{name} must be an integer, got {v!r}")
    if not 1 <= L <= D <= K:
        raise InvalidParameters(f"need 1 <= L <= D <= K, got K={K}, D={D}, L={L}")


def remainder_and_granularity(K: int, D: int) -> tuple[int, int]:
    R = K % D
    return R, gcd(D + R, R)


@dataclass(frozen=True)
class CapacityBounds:
    K: int
    D: int
    L: int
    R: int
    S: int
    lower: Fraction
    upper: Fraction
    tight: bool

    def describe(self) -> str:
        return (f"R={self.R} S={self.S} lower={self.lower} upper={self.upper} "
                f"tight={'yes' if self.tight else 'no'}")


def compute_bounds(K: int, D: int, L: int) -> CapacityBounds:
    """Exact lower and upper capacity bounds and whether they coincide."""
    validate_params(K, D, L)
    R, S = remainder_and_granularity(K, D)
    q = K // D
    lower = 1 / (q + min(Fraction(R, S), Fraction(R, L)))
    upper = 1 / (q + min(Fraction(1), Fraction(R, L)))
    return CapacityBounds(K, D, L, R, S, lower, upper, tight=lower == upper)


def tightness_predicate(K: int, D: int, L: int) -> bool:
    """Closed-form condition under which the two bounds meet."""
    validate_params(K, D, L)
    R = K % D
    return R == 0 or R <= L or D % R == 0


def closed_form_converse(K: int, D: int, L: int) -> int:
    """Minimum download of the converse integer program, in closed form."""
    validate_params(K, D, L)
    return L * (K // D) + min(L, K % D)


def ilp_converse_oracle(K: int, D: int, L: int) -> tuple[int, dict[int, int]]:
    """Exhaustively solve the converse integer program.

    Minimise sum_j T_j * min(j, L) subject to sum_j j * T_j = K, T_D >= 1 and
    T_j >= 0 for j in 1..D.  Returns the optimum and one minimiser as a
    mapping j -> T_j with zero entries dropped.
    """
    validate_params(K, D, L)
    if K > ILP_MAX_K:
        raise InstanceTooLarge(f"exhaustive search is capped at K <= {ILP_MAX_K}")

    @lru_cache(maxsize=None)
    def best(rem: int, largest: int) -> tuple[int, tuple[tuple[int, int], ...]] | None:
        # cheapest way to write rem as a sum of parts of size <= largest
        if rem == 0:
            return 0, ()
        if largest == 0:
            return None
        found = None
        for count in range(rem // largest, -1, -1):
            sub = best(rem - count * largest, largest - 1)
            if sub is None:
                continue
            cost = count * min(largest, L) + sub[0]
            if found is None or cost < found[0]:
                parts = ((largest, count),) + sub[1] if count else sub[1]
                found = (cost, parts)
        return found

    result = None
    for t_d in range(K // D, 0, -1):
        sub = best(K - t_d * D, D - 1)
        if sub is None:
            continue
        cost = t_d * L + sub[0]
        if result is None or cost < result[0]:
            result = (cost, {D: t_d, **dict(sub[1])})
    assert result is not None  # T_D = floor(K/D) with the remainder as ones is always feasible
    return result
