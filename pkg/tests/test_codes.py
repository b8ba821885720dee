import numpy as np
import pytest

from iplt.codes import embed_mds_generator, extend_pinned_mds, generator_from_parity, parity_check
from iplt.errors import InvalidParameters, NotMds, RankError, SamplingExhausted, ShapeError
from iplt.field import PrimeField
from iplt.linalg import matmul, rank
from iplt.mds import is_mds, sample_mds

from oracles import brute_is_mds, brute_kernel, brute_left_solve_row, span

F13 = PrimeField(13)
V_TILDE = [[1, 3, 2, 7, 10, 12], [3, 6, 8, 3, 12, 5], [9, 12, 6, 5, 4, 1]]
LAMBDA = [[12, 11, 3, 2, 5, 11], [10, 9, 12, 12, 6, 10], [4, 5, 9, 7, 2, 2]]
H = [[12, 4, 11, 3, 3, 2, 5, 11], [10, 7, 9, 12, 4, 12, 6, 10], [4, 9, 5, 9, 1, 7, 2, 2]]
G_LAST = [[1, 4, 5, 9, 2, 8, 4, 11], [3, 7, 10, 10, 7, 9, 10, 10], [9, 9, 7, 1, 5, 2, 12, 2],
          [1, 6, 1, 4, 11, 12, 4, 3], [3, 4, 2, 3, 6, 7, 10, 11]]
POS = [0, 2, 3, 5, 6, 7]


@pytest.mark.parametrize("method", ["auto", "canonical"])
def test_parity_check_of_worked_demand(method):
    Lam = parity_check(V_TILDE, F13, method=method)
    assert Lam.shape == (3, 6)
    assert not matmul(V_TILDE, Lam.T, F13).any()
    assert rank(Lam, F13) == 3 and brute_is_mds(Lam.tolist(), 13)


def test_reference_parity_check_annihilates_demand():
    assert sum(a * b for a, b in zip(V_TILDE[0], LAMBDA[0])) == 247
    assert 247 % 13 == 0
    assert not matmul(V_TILDE, np.array(LAMBDA).T, F13).any()
    assert np.array_equal(parity_check(V_TILDE, F13), LAMBDA)


def test_parity_check_systematic_form():
    A = [[1, 1, 1], [1, 2, 3]]
    V = np.hstack([np.eye(2, dtype=int), A])
    assert brute_is_mds(V.tolist(), 13)
    Lam = parity_check(V, F13, method="canonical")
    expected = np.hstack([(-np.array(A).T) % 13, np.eye(3, dtype=int)])
    assert np.array_equal(Lam, expected)


def test_parity_check_against_kernel_oracle():
    F7 = PrimeField(7)
    rng = np.random.default_rng(1)
    for _ in range(20):
        V = sample_mds(2, 5, F7, rng)
        kernel = brute_kernel(V.tolist(), 7)
        for method in ("auto", "canonical"):
            Lam = parity_check(V, F7, method=method)
            assert Lam.shape == (3, 5)
            assert span(Lam.tolist(), 7) == kernel


def test_parity_check_rejects_non_mds():
    with pytest.raises(NotMds):
        parity_check([[1, 0, 1], [0, 1, 0]], F13)


def test_extend_pinned_worked_example():
    Lam = np.array(LAMBDA)
    for method in ("auto", "rejection"):
        Hx = extend_pinned_mds(Lam, 8, POS, F13, np.random.default_rng(0), method=method)
        assert np.array_equal(Hx[:, POS], Lam)
        assert brute_is_mds(Hx.tolist(), 13)
    assert np.array_equal(np.array(H)[:, POS], Lam) and brute_is_mds(H, 13)
    injected = extend_pinned_mds(Lam, 8, POS, F13, np.random.default_rng(0), free_columns=[[4, 3], [7, 4], [9, 1]])
    assert np.array_equal(injected, H)


def test_extend_trivial_cases():
    Lam = np.array(LAMBDA)
    assert np.array_equal(extend_pinned_mds(Lam, 6, range(6), F13, np.random.default_rng(0)), Lam)
    for method in ("auto", "rejection"):
        row = extend_pinned_mds([[1]], 3, [0], F13, np.random.default_rng(2), method=method)
        assert row[0, 0] == 1 and (row != 0).all()


def test_extend_errors():
    rng = np.random.default_rng(0)
    with pytest.raises(NotMds):
        extend_pinned_mds([[1, 0, 1], [0, 1, 0]], 5, [0, 1, 2], F13, rng)
    with pytest.raises(InvalidParameters):
        extend_pinned_mds([[1, 2]], 4, [0, 0], F13, rng)
    with pytest.raises(ShapeError):
        extend_pinned_mds([[1, 2, 3]], 2, [0, 1], F13, rng)
    # an MDS code of dimension 2 over F_5 has length at most 6
    F5 = PrimeField(5)
    Lam = sample_mds(2, 5, F5, rng)
    with pytest.raises(SamplingExhausted):
        extend_pinned_mds(Lam, 7, range(5), F5, rng, max_tries=200)


def test_generator_from_reference_parity():
    G = generator_from_parity(H, F13)
    assert G.shape == (5, 8)
    assert not matmul(G, np.array(H).T, F13).any()
    assert np.array_equal(G, G_LAST)
    assert sum(a * b for a, b in zip(G_LAST[0], H[0])) == 273 and 273 % 13 == 0
    assert is_mds(G_LAST, F13)
    Gc = generator_from_parity(H, F13, method="canonical")
    assert not matmul(Gc, np.array(H).T, F13).any() and rank(Gc, F13) == 5 and is_mds(Gc, F13)


def test_generator_from_identity_parity():
    Hs = np.hstack([np.eye(2, dtype=int), np.zeros((2, 3), dtype=int)])
    G = generator_from_parity(Hs, F13, method="canonical")
    assert np.array_equal(G, np.hstack([np.zeros((3, 2), dtype=int), np.eye(3, dtype=int)]))


def test_generator_against_kernel_oracle_and_rank_error():
    F7 = PrimeField(7)
    rng = np.random.default_rng(4)
    for _ in range(20):
        Hm = sample_mds(2, 5, F7, rng)
        G = generator_from_parity(Hm, F7)
        assert G.shape == (3, 5)
        assert span(G.tolist(), 7) == brute_kernel(Hm.tolist(), 7)
    with pytest.raises(RankError):
        generator_from_parity([[1, 2, 3], [2, 4, 6]], F13)


def test_embed_with_injected_intermediates():
    G = embed_mds_generator(V_TILDE, 8, POS, F13, np.random.default_rng(0), parity=LAMBDA, extended=H)
    assert np.array_equal(G, G_LAST)
    with pytest.raises(InvalidParameters):
        embed_mds_generator(V_TILDE, 8, POS, F13, np.random.default_rng(0), parity=H)
    bad = np.array(H)
    bad[0, 0] = 1
    with pytest.raises(InvalidParameters):
        embed_mds_generator(V_TILDE, 8, POS, F13, np.random.default_rng(0), parity=LAMBDA, extended=bad)


def test_embed_small_instance_by_brute_force_solve():
    rng = np.random.default_rng(9)
    L, D, R = 2, 3, 1
    for _ in range(10):
        V = sample_mds(L, D, F13, rng)
        subset = sorted(rng.choice(D + R, D, replace=False).tolist())
        G = embed_mds_generator(V, D + R, subset, F13, rng)
        assert G.shape == (L + R, D + R) and brute_is_mds(G.tolist(), 13)
        for row in range(L):
            target = [0] * (D + R)
            for j, c in enumerate(subset):
                target[c] = int(V[row, j])
            assert brute_left_solve_row(G.tolist(), target, 13), "demand row missing from row space"


def test_embed_full_dimension_demand():
    V = sample_mds(3, 3, F13, np.random.default_rng(1))
    G = embed_mds_generator(V, 5, [0, 2, 4], F13, np.random.default_rng(1))
    assert np.array_equal(G, np.eye(5, dtype=int))
