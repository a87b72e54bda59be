"""Brute-force CPD oracle: exhaustive search over rank-1 summands.

Deliberately independent of the search modules; it shares only the field,
matrix and tensor primitives.  Every nonzero rank-1 tensor has a unique
normalized form (each factor beyond the first has leading entry 1, the
first factor carries the scale), so enumerating strictly increasing
combinations of normalized summands covers every candidate CPD once:
repeated summands collapse to a single scaled summand, so they never help.
"""
from __future__ import annotations

import itertools
import time
from math import prod
from typing import Optional

from .errors import BudgetExceededError
from .field import Field
from .matrix import Mat
from .tensor import Cpd, Tensor, cpd_verify, outer_flat
from .search_general import SearchOutcome, SearchStats

DEFAULT_BUDGET = 10 ** 8


def _nonzero_vectors(field: Field, n: int):
    for v in itertools.product(range(field.p), repeat=n):
        if any(v):
            yield v


def _normalized_vectors(field: Field, n: int):
    for v in _nonzero_vectors(field, n):
        first = next(x for x in v if x)
        if first == 1:
            yield v


def _summands(t: Tensor) -> list:
    """All normalized rank-1 candidates as (vectors, flat tensor), in
    lexicographic order of the concatenated vectors."""
    f = t.field
    pools = [list(_nonzero_vectors(f, t.dims[0]))]
    for n in t.dims[1:]:
        pools.append(list(_normalized_vectors(f, n)))
    out = []
    for vecs in itertools.product(*pools):
        out.append((vecs, outer_flat(f, vecs)))
    return out


def oracle_decompose(t: Tensor, R: int, budget: int = DEFAULT_BUDGET) -> SearchOutcome:
    """Exact decision of rank(t) <= R by exhaustive enumeration.

    The outcome carries a verified CPD on success; states_tested counts
    candidate columns tried.  Raises BudgetExceededError past `budget`."""
    t0 = time.perf_counter()
    cpd, tried = _decompose_impl(t, R, budget)
    return SearchOutcome(cpd, SearchStats(tried, 0, time.perf_counter() - t0))


def _decompose_impl(t: Tensor, R: int, budget: int) -> tuple:
    f = t.field
    p = f.p
    size = t.size
    if not any(t.data):
        cpd = Cpd(f, tuple(Mat.zeros(f, n, 0) for n in t.dims))
        assert cpd_verify(t, cpd)
        return cpd, 0
    if R <= 0:
        return None, 0
    summands = _summands(t)
    m = len(summands)
    residual = list(t.data)
    nonzero = sum(1 for x in t.data if x)
    chosen = []
    remaining_budget = [budget]

    def dfs(start: int, remaining: int) -> bool:
        nonlocal nonzero
        if nonzero == 0:
            return True
        if remaining == 0:
            return False
        for s in range(start, m):
            remaining_budget[0] -= 1
            if remaining_budget[0] < 0:
                raise BudgetExceededError(
                    f"oracle budget of {budget} candidate columns exhausted")
            flat = summands[s][1]
            delta = 0
            for q in range(size):
                x = flat[q]
                if x:
                    old = residual[q]
                    new = (old - x) % p
                    residual[q] = new
                    delta += (new != 0) - (old != 0)
            nonzero += delta
            chosen.append(s)
            if dfs(s + 1, remaining - 1):
                return True
            chosen.pop()
            nonzero -= delta
            for q in range(size):
                x = flat[q]
                if x:
                    residual[q] = (residual[q] + x) % p
        return False

    hit = dfs(0, R)
    tried = budget - remaining_budget[0]
    if not hit:
        return None, tried
    factors = []
    for d in range(t.ndim):
        cols = [summands[s][0][d] for s in chosen]
        factors.append(Mat.from_cols(f, cols, rows=t.dims[d]))
    cpd = Cpd(f, tuple(factors))
    assert cpd_verify(t, cpd)
    return cpd, tried


def oracle_rank(t: Tensor, budget: int = DEFAULT_BUDGET) -> int:
    """Smallest R with oracle_decompose Found, scanning R = 0, 1, 2, ...

    Terminates because a CPD of width prod(dims[1:]) always exists."""
    bound = prod(t.dims[1:])
    for R in range(bound + 1):
        if oracle_decompose(t, R, budget=budget).found:
            return R
    raise AssertionError("unreachable: trivial decomposition was not found")
