import json
import math
from fractions import Fraction

import numpy as np
import pytest

from iplt.audit import (
    candidate_supports,
    last_block_weight,
    monte_carlo_audit,
    recoverability_fuzz,
    structural_posterior,
    valid_grid,
)
from iplt.errors import InvalidParameters
from iplt.field import PrimeField
from iplt.fixtures import INSTANCES
from iplt.protocol import Demand, answer, gen_query, make_layout, recover

from oracles import posterior_given_permutation

F13 = PrimeField(13)


@pytest.mark.parametrize("K,D,L,expected", [
    (20, 8, 3, Fraction(8, 20)),
    (20, 6, 3, Fraction(3, 10)),
    (6, 6, 2, Fraction(1)),
])
def test_structural_posterior_examples(K, D, L, expected):
    lay = make_layout(K, D, L)
    rng = np.random.default_rng(K + D)
    for _ in range(20):
        demand = Demand.random(K, D, L, F13, rng)
        pi = gen_query(demand, rng)[0].pi
        assert structural_posterior(lay, pi) == [expected] * K


def test_last_block_weight_values():
    assert last_block_weight(make_layout(20, 8, 3)) == Fraction(2, 3)
    assert last_block_weight(make_layout(20, 6, 3)) == Fraction(6, 8)
    # the weighted last block reproduces the prior
    for K, D, L in [(20, 8, 3), (20, 6, 3), (10, 6, 2), (7, 3, 2)]:
        lay = make_layout(K, D, L)
        assert last_block_weight(lay) * Fraction(D + lay.R, K) == Fraction(D, K)


@pytest.mark.parametrize("shape", [(5, 2, 1), (7, 3, 2), (10, 6, 2), (9, 4, 1), (8, 3, 3), (11, 4, 3)])
def test_structural_posterior_against_bayes_enumeration(shape):
    K, D, L = shape
    lay = make_layout(K, D, L)
    rng = np.random.default_rng(7)
    for _ in range(8):
        demand = Demand.random(K, D, L, F13, rng)
        pi = gen_query(demand, rng)[0].pi.tolist()
        exact = posterior_given_permutation(K, D, L, pi)
        assert exact == [Fraction(D, K)] * K
        assert structural_posterior(lay, pi) == exact


def test_candidate_supports_counts():
    assert len(list(candidate_supports(make_layout(20, 8, 3)))) == 1 + 3
    assert len(list(candidate_supports(make_layout(20, 6, 3)))) == 2 + 28


def test_monte_carlo_degenerate_is_exact():
    report = monte_carlo_audit(2, 2, 1, 1000, np.random.default_rng(0))
    assert report.max_deviation == 0.0 and report.max_tv == 0.0


@pytest.mark.slow
@pytest.mark.parametrize("shape", [(5, 2, 1), (7, 3, 2)])
def test_monte_carlo_rate(shape, mc_report):
    devs = {}
    for N in (10**4, 10**5, 10**6):
        r = mc_report(*shape, N)
        assert r.flagged_classes == 0
        devs[N] = r.max_deviation
        assert 0.5 < r.max_deviation * math.sqrt(N) < 20
        assert r.max_tv * math.sqrt(N) < 20
    assert devs[10**4] > devs[10**5] > devs[10**6]
    assert devs[10**4] / devs[10**6] > 3


def test_monte_carlo_full_generation_small():
    report = monte_carlo_audit(5, 2, 1, 3000, np.random.default_rng(1), full=True)
    assert report.sampler == "full" and report.trials == 3000
    assert report.max_deviation < 0.1 and report.max_tv < 0.1
    data = json.loads(report.to_json())
    assert data["K"] == 5 and len(data["tv_distance"]) == 5 and "max_tv" in data
    assert "max |posterior - prior|" in report.to_text()


def test_monte_carlo_limits_and_flags():
    with pytest.raises(InvalidParameters):
        monte_carlo_audit(9, 3, 1, 10, np.random.default_rng(0))
    report = monte_carlo_audit(7, 3, 2, 200, np.random.default_rng(0))
    assert report.flagged_classes > 0 and any("fewer than" in n for n in report.notes)


def test_fuzz_small_grid_passes():
    grid = valid_grid(9, 13)
    assert (9, 9, 9) in grid and all(L <= D <= K for K, D, L in grid)
    report = recoverability_fuzz(grid, 2, F13, seed=5)
    assert report.ok and report.sessions == 2 * len(grid) and not report.failures()
    assert "case" in report.to_text()


def test_valid_grid_respects_field_size():
    assert all(D + K % D < 7 for K, D, L in valid_grid(12, 7))
    assert (12, 5, 1) not in valid_grid(12, 7)


def test_zero_messages_give_zero_demand():
    rng = np.random.default_rng(3)
    for K, D, L in [(20, 8, 3), (20, 6, 3), (7, 3, 2)]:
        demand = Demand.random(K, D, L, F13, rng)
        query, state = gen_query(demand, rng)
        assert not recover(answer(query, np.zeros(K, dtype=int)), state).any()


@pytest.mark.parametrize("number", [1, 2])
def test_worked_instances_recover(number):
    inst = INSTANCES[number]
    query, state = gen_query(inst.demand(), np.random.default_rng(0), fixtures=inst.fixtures)
    rng = np.random.default_rng(number)
    for _ in range(20):
        X = F13.random(inst.K, rng)
        Z = recover(answer(query, X), state)
        X_w = X[np.array(inst.fixtures.w_order) - 1]
        assert Z.tolist() == [sum(a * b for a, b in zip(row, X_w)) % 13 for row in inst.v_tilde]
