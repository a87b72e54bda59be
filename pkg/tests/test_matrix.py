"""Tests for exact GF(p) linear algebra and factorization streams."""
import itertools
import random

import pytest

from cpdsearch import (
    GF,
    InfeasibleInnerDimError,
    Mat,
    ShapeError,
    SingularMatrixError,
    enumerate_factorizations,
    enumerate_full_rank,
    hstack,
    inverse,
    kernel_basis,
    rank,
    rank_normal_form,
    rref_transform,
    solve_right_factors,
    vstack,
)

F2 = GF(2)
F3 = GF(3)
F5 = GF(5)


def random_mat(field, rows, cols, rng):
    return Mat(field, rows, cols,
               tuple(rng.randrange(field.p) for _ in range(rows * cols)))


def all_mats(field, rows, cols):
    for flat in itertools.product(range(field.p), repeat=rows * cols):
        yield Mat(field, rows, cols, flat)


# ---------------------------------------------------------------- basics

def test_constructors_and_access():
    m = Mat.from_rows(F5, [[1, 2, 3], [4, 0, 1]])
    assert (m.rows, m.cols) == (2, 3)
    assert m[1, 2] == 1
    assert m.row(0) == (1, 2, 3)
    assert m.col(1) == (2, 0)
    assert m.row_list() == [(1, 2, 3), (4, 0, 1)]
    assert Mat.from_cols(F5, [[1, 4], [2, 0], [3, 1]]) == m
    assert Mat.from_rows(F5, [[6, 7, 3], [9, 5, 6]]) == m


def test_constructor_rejects_bad_shapes():
    with pytest.raises(ShapeError):
        Mat(F2, 2, 2, (0, 1, 0))
    with pytest.raises(ShapeError):
        Mat(F2, 1, 2, (0, 2))
    with pytest.raises(ShapeError):
        Mat.from_rows(F2, [[1, 0], [1]])
    with pytest.raises(ShapeError):
        Mat.from_cols(F2, [[1, 0], [1]])


def test_zero_dimension_matrices():
    e = Mat.from_rows(F2, [], cols=3)
    assert (e.rows, e.cols) == (0, 3)
    assert e.transpose().rows == 3 and e.transpose().cols == 0
    assert rank(e) == 0
    m = e.transpose() @ e
    assert (m.rows, m.cols) == (3, 3) and m.is_zero


def test_arithmetic():
    a = Mat.from_rows(F5, [[1, 2], [3, 4]])
    b = Mat.from_rows(F5, [[0, 1], [1, 0]])
    assert a + b == Mat.from_rows(F5, [[1, 3], [4, 4]])
    assert a - b == Mat.from_rows(F5, [[1, 1], [2, 4]])
    assert a.scale(2) == Mat.from_rows(F5, [[2, 4], [1, 3]])
    assert a @ b == Mat.from_rows(F5, [[2, 1], [4, 3]])
    assert a.transpose() == Mat.from_rows(F5, [[1, 3], [2, 4]])
    with pytest.raises(ShapeError):
        a @ Mat.from_rows(F5, [[1, 2]])
    with pytest.raises(ShapeError):
        a + Mat.from_rows(F3, [[1, 2], [0, 1]])


def test_stack_and_slices():
    a = Mat.from_rows(F2, [[1, 0], [0, 1]])
    b = Mat.from_rows(F2, [[1, 1], [0, 0]])
    assert hstack(a, b) == Mat.from_rows(F2, [[1, 0, 1, 1], [0, 1, 0, 0]])
    assert vstack(a, b) == Mat.from_rows(F2, [[1, 0], [0, 1], [1, 1], [0, 0]])
    assert hstack(a, b).left_cols(2) == a
    assert vstack(a, b).top_rows(2) == a
    with pytest.raises(ShapeError):
        hstack(a, Mat.from_rows(F2, [[1, 0]]))


# ------------------------------------------------------------------ rref

def test_rref_frozen_example_gf2():
    m = Mat.from_rows(F2, [[1, 1, 0, 1],
                           [1, 1, 1, 0],
                           [0, 0, 1, 1]])
    res = rref_transform(m)
    assert res.rank == 2
    assert res.rref == Mat.from_rows(F2, [[1, 1, 0, 1],
                                          [0, 0, 1, 1],
                                          [0, 0, 0, 0]])


def test_rref_frozen_example_gf5():
    m = Mat.from_rows(F5, [[2, 4], [1, 3]])
    res = rref_transform(m)
    assert res.rank == 2
    assert res.rref == Mat.identity(F5, 2)


def test_rref_transform_invariant():
    rng = random.Random(7)
    for field in (F2, F3, F5):
        for _ in range(40):
            r = rng.randrange(0, 5)
            c = rng.randrange(0, 5)
            m = random_mat(field, r, c, rng)
            res = rref_transform(m)
            assert res.transform @ m == res.rref
            assert rank(res.transform) == r
            assert rank(res.rref) == res.rank == rank(m)
            # rref leading structure: pivot columns strictly increase
            pivots = []
            for i in range(res.rank):
                row = res.rref.row(i)
                j = min(t for t in range(c) if row[t])
                assert row[j] == 1
                pivots.append(j)
            assert pivots == sorted(set(pivots))
            for i in range(res.rank, r):
                assert not any(res.rref.row(i))


def test_rref_is_canonical_per_row_space():
    # Any invertible recombination of the rows leaves the rref unchanged.
    rng = random.Random(11)
    m = Mat.from_rows(F3, [[1, 2, 0, 1], [0, 1, 1, 1], [1, 0, 1, 2]])
    base = rref_transform(m).rref
    gls = [g for g in enumerate_full_rank(F3, 3, 3)]
    for g in rng.sample(gls, 25):
        assert rref_transform(g @ m).rref == base


def test_rank_known_values():
    assert rank(Mat.zeros(F2, 3, 3)) == 0
    assert rank(Mat.identity(F5, 4)) == 4
    assert rank(Mat.from_rows(F2, [[1, 1], [1, 1]])) == 1
    assert rank(Mat.from_rows(F3, [[1, 2], [2, 4]])) == 1
    assert rank(Mat.from_rows(F3, [[1, 2], [0, 1]])) == 2


def test_rank_of_products():
    rng = random.Random(13)
    for field in (F2, F3):
        for _ in range(30):
            r = rng.randrange(0, 3)
            a = random_mat(field, 4, r, rng)
            b = random_mat(field, r, 4, rng)
            assert rank(a @ b) <= r


# --------------------------------------------------------------- inverse

def test_inverse():
    rng = random.Random(17)
    for field in (F2, F3, F5):
        count = 0
        while count < 10:
            m = random_mat(field, 3, 3, rng)
            if rank(m) < 3:
                continue
            count += 1
            assert m @ inverse(m) == Mat.identity(field, 3)
            assert inverse(m) @ m == Mat.identity(field, 3)


def test_inverse_rejects():
    with pytest.raises(SingularMatrixError):
        inverse(Mat.from_rows(F2, [[1, 1], [1, 1]]))
    with pytest.raises(SingularMatrixError):
        inverse(Mat.zeros(F3, 2, 3))


# ---------------------------------------------------------------- kernel

def test_kernel_basis_properties():
    rng = random.Random(19)
    for field in (F2, F3):
        for _ in range(40):
            m = random_mat(field, rng.randrange(1, 4), rng.randrange(1, 5), rng)
            kb = kernel_basis(m)
            assert kb.rows == m.cols - rank(m)
            assert kb.cols == m.cols
            assert rank(kb) == kb.rows
            assert (m @ kb.transpose()).is_zero


def test_kernel_basis_exhaustive_membership():
    # Over GF(2) the row space of the basis is exactly the kernel.
    for m in [Mat.from_rows(F2, [[1, 0, 1], [0, 1, 1]]),
              Mat.from_rows(F2, [[1, 1, 1]]),
              Mat.zeros(F2, 2, 3)]:
        kb = kernel_basis(m)
        spanned = set()
        for coeffs in itertools.product(range(2), repeat=kb.rows):
            v = [0] * m.cols
            for c, i in zip(coeffs, range(kb.rows)):
                if c:
                    v = [(a + b) % 2 for a, b in zip(v, kb.row(i))]
            spanned.add(tuple(v))
        true_kernel = {flat for flat in itertools.product(range(2), repeat=m.cols)
                       if (m @ Mat(F2, m.cols, 1, flat)).is_zero}
        assert spanned == true_kernel


def test_kernel_basis_is_canonical():
    # Row-equivalent matrices share the kernel, so they share the basis.
    m = Mat.from_rows(F3, [[1, 2, 0, 1], [0, 1, 1, 1]])
    kb = kernel_basis(m)
    for g in itertools.islice(enumerate_full_rank(F3, 2, 2), 10):
        assert kernel_basis(g @ m) == kb


# ------------------------------------------------------ rank normal form

def test_rank_normal_form():
    rng = random.Random(23)
    for field in (F2, F3, F5):
        for _ in range(30):
            a = rng.randrange(0, 4)
            b = rng.randrange(0, 4)
            m = random_mat(field, a, b, rng)
            nf = rank_normal_form(m)
            assert rank(nf.left) == a and rank(nf.right) == b
            prod = nf.left @ m @ nf.right
            want = tuple(1 if i == j and i < nf.rank else 0
                         for i in range(a) for j in range(b))
            assert prod.data == want


# ------------------------------------------------- full-rank enumeration

def test_enumerate_full_rank_counts():
    # Number of r x k full-row-rank matrices: prod_i (p^k - p^i).
    for p, r, k in [(2, 2, 2), (2, 2, 3), (2, 3, 3), (3, 2, 2), (3, 1, 2)]:
        field = GF(p)
        want = 1
        for i in range(r):
            want *= p ** k - p ** i
        got = list(enumerate_full_rank(field, r, k))
        assert len(got) == want
        assert len({m.data for m in got}) == want
        for m in got:
            assert rank(m) == r
    assert list(enumerate_full_rank(F2, 3, 2)) == []
    empties = list(enumerate_full_rank(F3, 0, 2))
    assert len(empties) == 1 and empties[0].rows == 0


def test_enumerate_full_rank_order_frozen():
    got = [m.data for m in enumerate_full_rank(F2, 2, 2)]
    assert got == [(0, 1, 1, 0), (0, 1, 1, 1),
                   (1, 0, 0, 1), (1, 0, 1, 1),
                   (1, 1, 0, 1), (1, 1, 1, 0)]
    # Row-major data is strictly increasing lexicographically.
    for a, b in zip(got, got[1:]):
        assert a < b


# ----------------------------------------------------- right factors

def test_solve_right_factors_count_and_validity():
    rng = random.Random(29)
    for field in (F2, F3):
        p = field.p
        for _ in range(25):
            k = rng.randrange(1, 4)
            n = rng.randrange(1, 3)
            rows = rng.randrange(1, 4)
            u = random_mat(field, rows, k, rng)
            v0 = random_mat(field, k, n, rng)
            target = u @ v0
            sols = list(solve_right_factors(u, target))
            s = rank(u)
            assert len(sols) == p ** ((k - s) * n)
            assert len({m.data for m in sols}) == len(sols)
            for v in sols:
                assert u @ v == target


def test_solve_right_factors_unsolvable_is_empty():
    u = Mat.zeros(F2, 2, 2)
    target = Mat.from_rows(F2, [[1, 0], [0, 0]])
    assert list(solve_right_factors(u, target)) == []


def test_solve_right_factors_exhaustive():
    # Cross-check against brute force over all candidate V.
    u = Mat.from_rows(F2, [[1, 1, 0]])
    target = Mat.from_rows(F2, [[1, 0]])
    got = {v.data for v in solve_right_factors(u, target)}
    want = {v.data for v in all_mats(F2, 3, 2) if u @ v == target}
    assert got == want and len(got) == 2 ** 4


def test_solve_right_factors_free_block_order():
    # With u == 0 the solutions are the free block itself, in lex order.
    u = Mat.zeros(F3, 1, 1)
    target = Mat.zeros(F3, 1, 2)
    got = [v.data for v in solve_right_factors(u, target)]
    assert got == [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1),
                   (1, 2), (2, 0), (2, 1), (2, 2)]


# ------------------------------------------------- factorization stream

def brute_factorizations(m, k):
    f = m.field
    out = set()
    for u in all_mats(f, m.rows, k):
        for v in all_mats(f, k, m.cols):
            if u @ v == m:
                out.add((u.data, v.data))
    return out


@pytest.mark.parametrize("field,rows,k", [
    (F2, [[1, 1], [0, 0]], 1),
    (F2, [[1, 1], [0, 0]], 2),
    (F2, [[1, 0], [0, 1]], 2),
    (F2, [[0, 0], [0, 0]], 1),
    (F3, [[1, 2], [2, 1]], 2),
    (F2, [[1, 0, 1], [0, 1, 1]], 2),
])
def test_enumerate_factorizations_matches_brute_force(field, rows, k):
    m = Mat.from_rows(field, rows)
    got = [(u.data, v.data) for u, v in enumerate_factorizations(m, k)]
    assert len(got) == len(set(got)), "duplicate factorization emitted"
    assert set(got) == brute_factorizations(m, k)


def test_enumerate_factorizations_products_verify():
    rng = random.Random(31)
    m = random_mat(F3, 2, 3, rng)
    k = rank(m) + 1
    n = 0
    for u, v in enumerate_factorizations(m, k):
        assert (u.rows, u.cols) == (2, k)
        assert (v.rows, v.cols) == (k, 3)
        assert u @ v == m
        n += 1
        if n >= 500:
            break
    assert n == 500


def test_enumerate_factorizations_infeasible():
    m = Mat.identity(F2, 2)
    with pytest.raises(InfeasibleInnerDimError):
        next(enumerate_factorizations(m, 1))
