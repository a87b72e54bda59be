"""Rank-R CPD search specialized to 3-axis tensors.

Instead of enumerating trailing factor columns directly, this algorithm
enumerates candidate rows v of the axis-0 change of basis.  Writing
K = R - n0 + 1 and r = rank(v x_0 T), any witness CPD containing v
satisfies v x_0 T = [[c, Y_1, Y_2]] + a b^T where the coefficient row c
can be normalized to z zeros followed by K - 1 - z ones.  The nonzero
part of (Y_1, Y_2) together with (a, b) then forms an inner-dimension
K - z factorization of the slice v x_0 T, so all candidates are read off
the factorization stream; the zero part is free and enumerated directly.
Each candidate (Y_1, Y_2) feeds the same greedy completion test as the
general search.

Two data-driven accelerations come from r* = the smallest r such that
the rows with slice rank <= r span the row space:

  shortcut  if R >= n0 * r*, a rank-(n0 r*) CPD exists outright: stack
            n0 independent low-rank rows into V, split each slice of
            V x_0 T into <= r* rank-1 terms, lift through V^-1;
  filter    otherwise some row of any witness basis has slice rank >= r*
            (else the rank-(r*-1) rows would span), so only rows with
            rank(v x_0 T) >= max(floor(R/n0) + 1, r*) are tried.
"""
from __future__ import annotations

import itertools
import sys
import time
from dataclasses import dataclass
from typing import Iterator, Optional

from .errors import SearchInputError
from .field import Field
from .matrix import (Mat, enumerate_factorizations, inverse, rank,
                     rref_transform, _basis_insert, _reduce_against)
from .tensor import Cpd, Tensor, cpd_verify
from .search_general import (SearchConfig, SearchOutcome, SearchStats,
                             _Context, _run_test, _search_parallel,
                             _validate_search_input)

# ----------------------------------------------------------------- r star

@dataclass(frozen=True)
class RStarResult:
    r_star: int
    witnesses: tuple  # n0 independent row vectors, slice rank <= r_star each


def _check_3d(t: Tensor):
    if t.ndim != 3:
        raise SearchInputError(f"expected a 3-axis tensor, got {t.ndim} axes")
    _validate_search_input(t)


def _slice_flat(t: Tensor, v) -> tuple:
    """v x_0 t as flat row-major data over axes 1 and 2."""
    p = t.field.p
    rs = t.dims[1] * t.dims[2]
    acc = [0] * rs
    for i, x in enumerate(v):
        if x:
            s = t.data[i * rs:(i + 1) * rs]
            for q in range(rs):
                acc[q] += x * s[q]
    return tuple(a % p for a in acc)


def slice_matrix(t: Tensor, v) -> Mat:
    return Mat(t.field, t.dims[1], t.dims[2], _slice_flat(t, v))


def compute_rstar(t: Tensor) -> RStarResult:
    """Scan all rows v, bucket by rank(v x_0 t), return the smallest r
    whose buckets 0..r contain n0 independent rows plus such rows."""
    _check_3d(t)
    f = t.field
    p = f.p
    n0 = t.dims[0]
    buckets = {}
    for v in itertools.product(range(p), repeat=n0):
        if not any(v):
            continue
        r = rank(slice_matrix(t, v))
        buckets.setdefault(r, []).append(v)
    basis = {}
    witnesses = []
    for r in range(min(t.dims[1], t.dims[2]) + 1):
        for v in buckets.get(r, ()):
            red = _reduce_against(basis, list(v), p)
            if any(red):
                _basis_insert(basis, red, p, f.inv)
                witnesses.append(v)
                if len(witnesses) == n0:
                    return RStarResult(r, tuple(witnesses))
    raise SearchInputError("input is not concise along axis 0")


def shortcut_construct(t: Tensor, rs: RStarResult) -> Cpd:
    """Rank-(<= n0 * r_star) CPD: factor each slice of V x_0 t into rank-1
    terms through its rref, lift the axis-0 part through V^-1."""
    f = t.field
    n0, n1, n2 = t.dims
    v_inv = inverse(Mat.from_rows(f, list(rs.witnesses), cols=n0))
    a0, a1, a2 = [], [], []
    for i, w in enumerate(rs.witnesses):
        m = slice_matrix(t, w)
        rr = rref_transform(m)
        left = inverse(rr.transform).left_cols(rr.rank)
        top = rr.rref.top_rows(rr.rank)
        vcol = v_inv.col(i)
        for s in range(rr.rank):
            a0.append(vcol)
            a1.append(left.col(s))
            a2.append(top.row(s))
    cpd = Cpd(f, (Mat.from_cols(f, a0, rows=n0),
                  Mat.from_cols(f, a1, rows=n1),
                  Mat.from_cols(f, a2, rows=n2)))
    assert cpd_verify(t, cpd), "slice factorization lift failed"
    return cpd


# ------------------------------------------------------- (Y1, Y2) stream

def _y12_columns(field: Field, mv: Mat, K: int) -> Iterator[tuple]:
    """Streams (Y1 columns, Y2 columns), each K - 1 column tuples.

    z counts leading zeros of the normalized coefficient row; the slice
    factors through inner dimension K - z, whose last rank-1 term is the
    (a, b) residual and whose head supplies the forced Y columns."""
    p = field.p
    r = rank(mv)
    if r > K:
        return
    n1, n2 = mv.rows, mv.cols
    for z in range(min(K - r, K - 1) + 1):
        inner = K - z
        head = inner - 1
        for w1, w2 in enumerate_factorizations(mv, inner):
            w1_cols = [w1.col(s) for s in range(head)]
            w2_rows = [w2.row(s) for s in range(head)]
            for l1 in itertools.product(range(p), repeat=n1 * z):
                l1_cols = [tuple(l1[i * z + j] for i in range(n1))
                           for j in range(z)]
                y1 = tuple(l1_cols + w1_cols)
                for l2 in itertools.product(range(p), repeat=z * n2):
                    l2_cols = [tuple(l2[j * n2:(j + 1) * n2])
                               for j in range(z)]
                    yield (y1, tuple(l2_cols + w2_rows))


def enumerate_y12(t: Tensor, v, R: int) -> Iterator[tuple]:
    """All (Y1, Y2) trailing-column candidates for the row v, as matrices
    with R - n0 columns.  Duplicates across z values are not filtered."""
    _check_3d(t)
    f = t.field
    K = R - t.dims[0] + 1
    mv = slice_matrix(t, v)
    for y1_cols, y2_cols in _y12_columns(f, mv, K):
        yield (Mat.from_cols(f, list(y1_cols), rows=t.dims[1]),
               Mat.from_cols(f, list(y2_cols), rows=t.dims[2]))


# ------------------------------------------------------------- the search

def _span_3d(t: Tensor, R: int, cfg: SearchConfig, worker_id: int,
             worker_count: int, cancel=None):
    """Scan the rows owned by (shard, worker); row order is lexicographic."""
    ctx = _Context(t, R, cfg.force_branch)
    f = t.field
    p = f.p
    n0 = t.dims[0]
    K = R - n0 + 1
    k = K - 1
    rs = compute_rstar(t)
    rho = max(R // n0 + 1, rs.r_star)
    shard_i, shard_n = cfg.shard if cfg.shard else (0, 1)
    counters = [0, 0]
    best = None
    best_gi = -1
    gi = -1
    li = -1
    t0 = time.perf_counter()
    interval = cfg.progress_interval
    for v in itertools.product(range(p), repeat=n0):
        if not any(v):
            continue
        gi += 1
        if (gi - shard_i) % shard_n:
            continue
        li += 1
        if worker_count > 1 and li % worker_count != worker_id:
            continue
        mv = slice_matrix(t, v)
        if rank(mv) < rho:
            continue
        for y1_cols, y2_cols in _y12_columns(f, mv, K):
            if cancel is not None and not (counters[0] & 2047) and cancel.is_set():
                return (best, best_gi, counters[0], counters[1], True)
            ycols = [ctx.ycol_from_columns((c1, c2))
                     for c1, c2 in zip(y1_cols, y2_cols)]
            cpd = _run_test(ctx, ycols, k,
                            lambda: [list(y1_cols), list(y2_cols)], counters)
            if interval and counters[0] % interval == 0 and worker_id == 0:
                print(f"progress: states={counters[0]} "
                      f"elapsed={time.perf_counter() - t0:.1f}s",
                      file=sys.stderr, flush=True)
            if cpd is not None:
                if not cfg.count_states:
                    return (cpd, gi, counters[0], counters[1], False)
                if best is None:
                    best, best_gi = cpd, gi
    return (best, best_gi, counters[0], counters[1], False)


def search_3d(t: Tensor, R: int, config: Optional[SearchConfig] = None) -> SearchOutcome:
    """Decide rank(t) <= R for a concise 3-axis tensor.

    Returns immediately with a constructed witness when R >= n0 * r_star
    (no states tested); otherwise runs the filtered row scan."""
    cfg = config or SearchConfig()
    _check_3d(t)
    t0 = time.perf_counter()
    if R < t.dims[0]:
        return SearchOutcome(None, SearchStats(0, 0, time.perf_counter() - t0))
    rs = compute_rstar(t)
    if R >= t.dims[0] * rs.r_star:
        cpd = shortcut_construct(t, rs)
        return SearchOutcome(cpd, SearchStats(0, 0, time.perf_counter() - t0))
    if cfg.threads <= 1:
        cpd, _, states, pairs, _ = _span_3d(t, R, cfg, 0, 1)
    else:
        cpd, states, pairs = _search_parallel(_span_3d, t, R, cfg)
    stats = SearchStats(states, pairs, time.perf_counter() - t0)
    if cpd is not None:
        assert cpd_verify(t, cpd), "search produced an invalid witness"
    return SearchOutcome(cpd, stats)
