"""Tests for the general rank-decision search."""
import itertools
import math
import random

import pytest

from cpdsearch import (
    GF,
    Mat,
    SearchConfig,
    SearchInputError,
    Tensor,
    YAssignment,
    cpd_verify,
    enumerate_y_assignments,
    good_pairs,
    mmt,
    outer_flat,
    rank,
    rank1_decompose,
    search_general,
)
from cpdsearch import test_assignment as check_assignment
from cpdsearch.search_general import (_bit_outer, _bit_rref_rows,
                                      _normalized_columns, pack_bits,
                                      unpack_bits)
from cpdsearch.matrix import rref_transform

F2 = GF(2)
F3 = GF(3)


def w_tensor(field):
    data = [0] * 8
    for i, j, k in [(0, 0, 1), (0, 1, 0), (1, 0, 0)]:
        data[4 * i + 2 * j + k] = 1
    return Tensor(field, (2, 2, 2), tuple(data))


def random_concise(field, dims, rng):
    from cpdsearch import unfold
    total = math.prod(dims)
    while True:
        t = Tensor(field, dims, tuple(rng.randrange(field.p) for _ in range(total)))
        if all(rank(unfold(t, d)) == t.dims[d] for d in range(t.ndim)):
            return t


def brute_pairs(t, y):
    """All (v, c) whose residual slice combination has rank <= 1."""
    f = t.field
    p = f.p
    n0 = t.dims[0]
    rest = t.dims[1:]
    rest_size = math.prod(rest)
    slices = [t.data[i * rest_size:(i + 1) * rest_size] for i in range(n0)]
    ycols = [outer_flat(f, tup) for tup in y.tuples]
    out = set()
    for v in itertools.product(range(p), repeat=n0):
        for c in itertools.product(range(p), repeat=y.k):
            flat = [0] * rest_size
            for i, vi in enumerate(v):
                if vi:
                    flat = [(a + vi * b) % p for a, b in zip(flat, slices[i])]
            for j, cj in enumerate(c):
                if cj:
                    flat = [(a - cj * b) % p for a, b in zip(flat, ycols[j])]
            if len(rest) == 2:
                ok = rank(Mat(f, rest[0], rest[1], tuple(flat))) <= 1
            else:
                ok = rank1_decompose(Tensor(f, rest, tuple(flat))) is not None
            if ok:
                out.add((v, c))
    return out


# ------------------------------------------------------------ bit helpers

def test_pack_unpack_roundtrip():
    for bits in itertools.product(range(2), repeat=6):
        assert unpack_bits(pack_bits(bits), 6) == bits
    assert pack_bits((1, 0, 1)) == 0b101


def test_bit_outer_matches_outer_flat():
    rng = random.Random(3)
    for _ in range(30):
        a = tuple(rng.randrange(2) for _ in range(3))
        b = tuple(rng.randrange(2) for _ in range(4))
        got = _bit_outer(pack_bits(a), 3, pack_bits(b), 4)
        assert unpack_bits(got, 12) == outer_flat(F2, [a, b])


def test_bit_rref_matches_generic_rref():
    rng = random.Random(5)
    for _ in range(60):
        rows = rng.randrange(0, 5)
        cols = rng.randrange(1, 7)
        m = Mat(F2, rows, cols, tuple(rng.randrange(2) for _ in range(rows * cols)))
        ref = rref_transform(m)
        want = [pack_bits(ref.rref.row(i)) for i in range(ref.rank)]
        got = _bit_rref_rows([pack_bits(m.row(i)) for i in range(rows)], cols)
        assert got == want


# ----------------------------------------------------- assignment stream

def test_normalized_columns():
    cols = _normalized_columns(F3, 2)
    assert cols == [(0, 1), (1, 0), (1, 1), (1, 2)]
    assert len(_normalized_columns(F2, 4)) == 15
    assert len(_normalized_columns(F3, 4)) == (3 ** 4 - 1) // 2


def test_stream_counts_mmt222():
    dims = (4, 4, 4)
    for R in (4, 5, 6):
        want = sum(math.comb(225, k) for k in range(R - 4 + 1))
        got = sum(1 for _ in enumerate_y_assignments(dims, F2, R))
        assert got == want
    assert want == 25426  # R = 6
    assert list(enumerate_y_assignments(dims, F2, 3)) == []


def test_stream_order():
    dims = (2, 2, 2)
    pools = [_normalized_columns(F2, 2), _normalized_columns(F2, 2)]
    table = {tup: i for i, tup in enumerate(itertools.product(*pools))}
    assert len(table) == 9
    seen_k = 0
    prev_combo = None
    for y in enumerate_y_assignments(dims, F2, 4):
        assert y.k >= seen_k
        if y.k > seen_k:
            seen_k = y.k
            prev_combo = None
        combo = tuple(table[tup] for tup in y.tuples)
        assert list(combo) == sorted(set(combo)), "tuples must strictly increase"
        if prev_combo is not None:
            assert combo > prev_combo
        prev_combo = combo
    assert seen_k == 2
    total = sum(math.comb(9, k) for k in range(3))
    assert total == 46 == sum(1 for _ in enumerate_y_assignments(dims, F2, 4))


def test_columns_by_axis():
    y = YAssignment((((0, 1), (1, 0)), ((1, 1), (1, 0))))
    assert y.k == 2
    assert y.columns_by_axis(2) == [((0, 1), (1, 1)), ((1, 0), (1, 0))]


# ------------------------------------------------------------ good pairs

def test_good_pairs_single_one_tensor():
    # With one slice entry every residual has rank <= 1: every v is good.
    t = Tensor(F2, (2, 2, 2), (1, 0, 0, 0, 0, 0, 0, 0))
    got = sorted(good_pairs(t, 2, YAssignment(())))
    assert got == [((0, 0), ()), ((0, 1), ()), ((1, 0), ()), ((1, 1), ())]


def test_good_pairs_identity_plus_nilpotent():
    # Slices I and [[0,1],[0,0]]: only multiples of the nilpotent slice stay
    # within rank 1.
    t = Tensor(F2, (2, 2, 2), (1, 0, 0, 1, 0, 1, 0, 0))
    got = sorted(good_pairs(t, 2, YAssignment(())))
    assert got == [((0, 0), ()), ((0, 1), ())]


@pytest.mark.parametrize("field", [F2, F3])
def test_direct_branch_matches_brute_force(field):
    rng = random.Random(field.p)
    cfg = SearchConfig(force_branch="direct")
    for _ in range(6):
        t = random_concise(field, (2, 2, 2), rng)
        stream = list(enumerate_y_assignments(t.dims, field, 3))
        for y in [stream[0]] + stream[1:4]:
            got = set(good_pairs(t, 3, y, cfg))
            assert got == brute_pairs(t, y)


def test_direct_branch_matches_brute_force_4d():
    rng = random.Random(11)
    cfg = SearchConfig(force_branch="direct")
    t = random_concise(F2, (2, 2, 2, 2), rng)
    stream = list(enumerate_y_assignments(t.dims, F2, 3))
    for y in stream[:4]:
        assert set(good_pairs(t, 3, y, cfg)) == brute_pairs(t, y)


@pytest.mark.parametrize("field", [F2, F3])
def test_kernel_branch_emits_good_pairs(field):
    rng = random.Random(field.p + 10)
    cfg = SearchConfig(force_branch="kernel")
    for _ in range(6):
        t = random_concise(field, (2, 2, 2), rng)
        stream = list(enumerate_y_assignments(t.dims, field, 3))
        for y in stream[:4]:
            brute = brute_pairs(t, y)
            for v, c in good_pairs(t, 3, y, cfg):
                assert (v, c) in brute


@pytest.mark.parametrize("field", [F2, F3])
def test_branches_agree_on_completion(field):
    # Either branch must reach the same Found / not-found verdict.
    rng = random.Random(field.p + 20)
    direct = SearchConfig(force_branch="direct")
    kernel = SearchConfig(force_branch="kernel")
    for _ in range(4):
        t = random_concise(field, (2, 2, 2), rng)
        for y in itertools.islice(enumerate_y_assignments(t.dims, field, 3), 8):
            a = check_assignment(t, 3, y, direct)
            b = check_assignment(t, 3, y, kernel)
            assert (a is None) == (b is None)
            if a is not None:
                assert cpd_verify(t, a) and cpd_verify(t, b)
                assert a.rank <= 2 + y.k and b.rank <= 2 + y.k


# -------------------------------------------------------- test_assignment

def test_assignment_diagonal_found_at_k0():
    t = Tensor(F2, (2, 2, 2), (1, 0, 0, 0, 0, 0, 0, 1))
    cpd = check_assignment(t, 2, YAssignment(()))
    assert cpd is not None and cpd_verify(t, cpd) and cpd.rank <= 2


def test_assignment_mmt222_not_found_at_k0():
    assert check_assignment(mmt(2, 2, 2, F2), 6, YAssignment(())) is None


# ---------------------------------------------------------------- search

def test_search_rejects_bad_input():
    with pytest.raises(SearchInputError):
        search_general(Tensor(F2, (2, 3, 2), (1,) * 12), 4)
    with pytest.raises(SearchInputError):
        search_general(Tensor(F2, (2, 2, 2), (1, 0, 0, 0, 0, 0, 0, 0)), 3)
    with pytest.raises(SearchInputError):
        search_general(Tensor(F2, (4,), (1, 0, 0, 1)), 2)


def test_search_below_leading_dim():
    out = search_general(mmt(2, 2, 2, F2), 3)
    assert not out.found and out.stats.states_tested == 0


def test_search_w_tensor():
    for field in (F2, F3):
        t = w_tensor(field)
        assert not search_general(t, 2).found
        out = search_general(t, 3)
        assert out.found and cpd_verify(t, out.cpd) and out.cpd.rank <= 3


def test_search_found_consistent_with_count_mode():
    t = w_tensor(F2)
    quick = search_general(t, 3)
    full = search_general(t, 3, SearchConfig(count_states=True))
    assert quick.found and full.found
    assert quick.cpd == full.cpd
    assert full.stats.states_tested >= quick.stats.states_tested


def test_search_mmt222_state_counts():
    out = search_general(mmt(2, 2, 2, F2), 5, SearchConfig(count_states=True))
    assert not out.found
    assert out.stats.states_tested == 226
    out = search_general(mmt(2, 2, 2, F2), 6, SearchConfig(count_states=True))
    assert not out.found
    assert out.stats.states_tested == 25426


def test_search_shards_partition_the_stream():
    t = mmt(2, 2, 2, F2)
    total = 0
    for i in range(3):
        out = search_general(t, 5, SearchConfig(count_states=True, shard=(i, 3)))
        assert not out.found
        total += out.stats.states_tested
    assert total == 226


def test_search_parallel_matches_serial():
    t = mmt(2, 2, 2, F2)
    out = search_general(t, 5, SearchConfig(count_states=True, threads=2))
    assert not out.found and out.stats.states_tested == 226
    w = w_tensor(F2)
    par = search_general(w, 3, SearchConfig(threads=2))
    assert par.found and cpd_verify(w, par.cpd)
