"""Exact rank-R CPD search for arbitrary-order tensors.

The search fixes the trailing R - n0 columns of the factor matrices on
axes 1..D-1 ("Y assignments", enumerated in a canonical normalized order)
and then decides in polynomial time whether the remaining columns can be
completed (`test_assignment`).  A tensor admits a rank-<=R CPD iff some
assignment passes, so the assignment stream is scanned in order of
increasing column count k with early exit on success.

Completion test per assignment: a row vector v is "good" if some
coefficient row c makes v x_0 T - [[c, Y_1, .., Y_{D-1}]] a rank-<=1
tensor.  The test greedily collects n0 linearly independent good rows and
reconstructs a witness CPD from their rank-1 residuals.  Good pairs (v, c)
come from one of two equivalent branches:

  direct  enumerate all (v, c) and check the residual rank directly;
  kernel  for each assignment u of the axis-2.. factors, good pairs are
          kernel vectors of a linear map, read off a nullspace basis.

The cheaper branch is chosen per assignment by comparing n0 + k against
the total length of the axes 2 and beyond; a config override can force
either branch.

Internally GF(2) data is bit-packed into Python ints (big-endian, so
lexicographic vector order is numeric order); this changes no observable
order or count.  All other fields use tuple arithmetic.
"""
from __future__ import annotations

import itertools
import sys
import time
from dataclasses import dataclass, field as dc_field
from math import prod
from typing import Iterator, Optional

from .errors import SearchInputError
from .field import Field
from .matrix import Mat, hstack, inverse, kernel_basis, rank, _basis_insert, _reduce_against
from .tensor import Cpd, Tensor, cpd_verify, outer_flat, rank1_decompose, unfold

# ---------------------------------------------------------------- types

@dataclass(frozen=True)
class SearchConfig:
    count_states: bool = False          # disable early exit; count every state
    shard: Optional[tuple] = None       # (index, count): take stream index % count == index
    threads: int = 1
    force_branch: Optional[str] = None  # "direct" | "kernel" | None (auto)
    progress_interval: Optional[int] = None  # states between stderr progress lines


@dataclass
class SearchStats:
    states_tested: int = 0
    good_pairs: int = 0
    elapsed: float = 0.0


@dataclass(frozen=True)
class SearchOutcome:
    cpd: Optional[Cpd]
    stats: SearchStats

    @property
    def found(self) -> bool:
        return self.cpd is not None


@dataclass(frozen=True)
class YAssignment:
    """k chosen column tuples; tuple r holds one column per axis 1..D-1."""
    tuples: tuple

    @property
    def k(self) -> int:
        return len(self.tuples)

    def columns_by_axis(self, axis_count: int) -> list:
        return [tuple(t[a] for t in self.tuples) for a in range(axis_count)]


@dataclass(frozen=True)
class SearchState:
    """Snapshot of the greedy completion state: the accepted v rows (full
    row rank) and their coefficient rows, plus the counters so far."""
    q_rows: Mat
    c_rows: Mat
    stats: SearchStats


# ------------------------------------------------------- bit helpers

def pack_bits(seq) -> int:
    acc = 0
    for b in seq:
        acc = (acc << 1) | b
    return acc


def unpack_bits(x: int, n: int) -> tuple:
    return tuple((x >> (n - 1 - i)) & 1 for i in range(n))


def _bit_outer(a: int, a_bits: int, b: int, b_bits: int) -> int:
    out = 0
    for i in range(a_bits - 1, -1, -1):
        if (a >> i) & 1:
            out |= b << (i * b_bits)
    return out


def _bit_rref_rows(vecs, width: int) -> list:
    """Canonical rref of the span of `vecs` (bit position width-1 is the
    leftmost coordinate).  Rows returned with pivots left to right."""
    pivots = {}
    for v in vecs:
        cur = v
        # Fully reduce: stored rows carry no pivot bit but their own, so one
        # descending sweep clears every pivot bit from cur.
        for hb in sorted(pivots, reverse=True):
            if cur & hb:
                cur ^= pivots[hb]
        if cur:
            hb = 1 << (cur.bit_length() - 1)
            for key, row in pivots.items():
                if row & hb:
                    pivots[key] = row ^ cur
            pivots[hb] = cur
    return [pivots[key] for key in sorted(pivots, reverse=True)]


# ------------------------------------------------------ normalized tuples

def _normalized_columns(field: Field, n: int) -> list:
    """Nonzero vectors with leading entry 1, lexicographic order."""
    out = []
    for v in itertools.product(range(field.p), repeat=n):
        if any(v) and next(x for x in v if x) == 1:
            out.append(v)
    return out


def enumerate_y_assignments(dims, field: Field, R: int) -> Iterator[YAssignment]:
    """Stream of assignments: k = 0 .. R - n0 tuples, each a strictly
    increasing combination of normalized column tuples (lexicographic by
    the concatenated columns, axis 1 outermost)."""
    dims = tuple(dims)
    n0 = dims[0]
    pools = [_normalized_columns(field, n) for n in dims[1:]]
    table = [tup for tup in itertools.product(*pools)]
    for k in range(max(R - n0, -1) + 1):
        for combo in itertools.combinations(range(len(table)), k):
            yield YAssignment(tuple(table[i] for i in combo))


# ------------------------------------------------------------- context

class _Context:
    """Per-(tensor, R) precomputation shared by every completion test."""

    def __init__(self, t: Tensor, R: int, force_branch: Optional[str] = None):
        self.t = t
        self.field = t.field
        self.p = t.field.p
        self.dims = t.dims
        self.n0 = t.dims[0]
        self.rest_dims = t.dims[1:]
        self.rest_size = prod(self.rest_dims)
        self.tail_dims = t.dims[2:]
        self.tail_size = prod(self.tail_dims)
        self.sum_tail = sum(self.tail_dims)
        self.R = R
        self.bit = (self.p == 2)
        if force_branch not in (None, "direct", "kernel"):
            raise SearchInputError(f"unknown branch {force_branch!r}")
        self.force_branch = force_branch
        rs = self.rest_size
        raw = [t.data[i * rs:(i + 1) * rs] for i in range(self.n0)]
        self.slices = [pack_bits(s) for s in raw] if self.bit else raw
        self._tails = None        # packed/tuple outer products of u_2.. assignments
        self._bases = {}          # k -> list of (basis dict, fixed deps) [bit path]
        self._table = None

    # -- assignment tables ------------------------------------------------

    def tuple_table(self) -> list:
        """Per normalized tuple: (columns per axis, native flattened outer)."""
        if self._table is None:
            pools = [_normalized_columns(self.field, n) for n in self.rest_dims]
            table = []
            for tup in itertools.product(*pools):
                table.append((tup, self.pack_rest(outer_flat(self.field, tup))))
            self._table = table
        return self._table

    def pack_rest(self, flat):
        return pack_bits(flat) if self.bit else tuple(flat)

    def ycol_from_columns(self, cols) -> object:
        """Native flattened outer product of one column per axis 1..D-1."""
        return self.pack_rest(outer_flat(self.field, cols))

    def branch(self, k: int) -> str:
        if self.force_branch:
            return self.force_branch
        return "direct" if self.n0 + k <= self.sum_tail else "kernel"

    # -- residuals ---------------------------------------------------------

    def residual_flat(self, vrow, crow, ycols) -> tuple:
        """v x_0 T - sum_j c_j * ycol_j as a flat tuple over axes 1..D-1."""
        p = self.p
        if self.bit:
            acc = 0
            for x, s in zip(vrow, self.slices):
                if x:
                    acc ^= s
            for x, y in zip(crow, ycols):
                if x:
                    acc ^= y
            return unpack_bits(acc, self.rest_size)
        acc = [0] * self.rest_size
        for x, s in zip(vrow, self.slices):
            if x:
                for q in range(self.rest_size):
                    acc[q] += x * s[q]
        for x, y in zip(crow, ycols):
            if x:
                for q in range(self.rest_size):
                    acc[q] -= x * y[q]
        return tuple(a % p for a in acc)

    # -- u-assignment machinery --------------------------------------------

    def tails(self) -> list:
        """Flattened outer products of every assignment of the axis-2..
        vectors, in lexicographic order of the concatenated vectors."""
        if self._tails is None:
            if self.bit:
                out = []
                for combo in itertools.product(*[range(1 << n) for n in self.tail_dims]):
                    acc, bits = 1, 0
                    for v, n in zip(combo, self.tail_dims):
                        acc = _bit_outer(acc, bits, v, n) if bits else v
                        bits += n
                    out.append(acc if self.tail_dims else 1)
                self._tails = out
            else:
                pools = [list(itertools.product(range(self.p), repeat=n))
                         for n in self.tail_dims]
                self._tails = [outer_flat(self.field, vs)
                               for vs in itertools.product(*pools)]
        return self._tails

    def _kernel_bases_bit(self, k: int) -> list:
        """Per u-assignment: the elimination basis of the fixed columns
        (T slices and the u_1 block), dependencies among them, and a memo
        for Y-column reductions against that basis (state-independent, so
        shared across assignments).  Unknown order is (v, c, u_1); combos
        are bit vectors over it, the basis is indexed by pivot bit."""
        cached = self._bases.get(k)
        if cached is not None:
            return cached
        n0, n1 = self.n0, self.rest_dims[0]
        L = n0 + k + n1
        ts = self.tail_size
        bases = []
        for tail in self.tails():
            fixed = [None] * self.rest_size
            deps = []
            cols = [(1 << (L - 1 - i), s) for i, s in enumerate(self.slices)]
            cols += [(1 << (n1 - 1 - i), tail << ((n1 - 1 - i) * ts))
                     for i in range(n1)]
            for combo, col in cols:
                cur = col
                while cur:
                    idx = cur.bit_length() - 1
                    e = fixed[idx]
                    if e is None:
                        fixed[idx] = (cur, combo)
                        break
                    cur ^= e[0]
                    combo ^= e[1]
                else:
                    deps.append(combo)
            bases.append((fixed, tuple(deps),
                          tuple(_bit_rref_rows(deps, L)), {}))
        self._bases[k] = bases
        return bases

    # -- good pair generators ------------------------------------------------

    def pairs(self, ycols, k: int) -> Iterator[tuple]:
        """(v, c) pairs in native representation."""
        if self.branch(k) == "direct":
            return (self._pairs_direct_bit(ycols, k) if self.bit
                    else self._pairs_direct_generic(ycols, k))
        return (self._pairs_kernel_bit(ycols, k) if self.bit
                else self._pairs_kernel_generic(ycols, k))

    def _packed_rank_le1(self, x: int) -> bool:
        if x == 0:
            return True
        if len(self.rest_dims) == 2:
            n1, n2 = self.rest_dims
            mask = (1 << n2) - 1
            first = 0
            for i in range(n1):
                chunk = (x >> (i * n2)) & mask
                if chunk:
                    if not first:
                        first = chunk
                    elif chunk != first:
                        return False
            return True
        return _flat_rank_le1(self.field, self.rest_dims, unpack_bits(x, self.rest_size))

    def _pairs_direct_bit(self, ycols, k):
        n0 = self.n0
        slices = self.slices
        comb = [0] * (1 << k)
        for ci in range(1, 1 << k):
            low = ci & -ci
            comb[ci] = comb[ci ^ low] ^ ycols[k - low.bit_length()]
        rank1 = self._packed_rank_le1
        for v in range(1 << n0):
            base = 0
            vv = v
            while vv:
                hb = vv.bit_length() - 1
                base ^= slices[n0 - 1 - hb]
                vv ^= 1 << hb
            for ci in range(1 << k):
                if rank1(base ^ comb[ci]):
                    yield (v, ci)

    def _pairs_direct_generic(self, ycols, k):
        p = self.p
        rs = self.rest_size
        for v in itertools.product(range(p), repeat=self.n0):
            base = [0] * rs
            for x, s in zip(v, self.slices):
                if x:
                    for q in range(rs):
                        base[q] += x * s[q]
            for c in itertools.product(range(p), repeat=k):
                res = list(base)
                for x, y in zip(c, ycols):
                    if x:
                        for q in range(rs):
                            res[q] -= x * y[q]
                flat = tuple(a % p for a in res)
                if _flat_rank_le1(self.field, self.rest_dims, flat):
                    yield (v, c)

    def _pairs_kernel_bit(self, ycols, k):
        n0, n1 = self.n0, self.rest_dims[0]
        L = n0 + k + n1
        vshift = k + n1
        cmask = (1 << k) - 1
        ycombos = [1 << (n1 + k - 1 - j) for j in range(k)]
        for fixed, deps0, rref0, memo in self._kernel_bases_bit(k):
            deps = None
            extra = None
            for j in range(k):
                y = ycols[j]
                ent = memo.get(y)
                if ent is None:
                    # reduce y against the fixed basis once; later states
                    # with the same column reuse the result
                    cur = y
                    combo = 0
                    while cur:
                        e = fixed[cur.bit_length() - 1]
                        if e is None:
                            break
                        cur ^= e[0]
                        combo ^= e[1]
                    ent = (cur, combo)
                    memo[y] = ent
                cur, combo = ent
                combo ^= ycombos[j]
                if extra:
                    while cur:
                        idx = cur.bit_length() - 1
                        e = extra.get(idx)
                        if e is None:
                            e = fixed[idx]
                            if e is None:
                                break
                        cur ^= e[0]
                        combo ^= e[1]
                if cur:
                    if extra is None:
                        extra = {}
                    extra[cur.bit_length() - 1] = (cur, combo)
                else:
                    if deps is None:
                        deps = list(deps0)
                    deps.append(combo)
            if deps is None:
                # no new dependencies: the canonical rows are precomputed
                for row in rref0:
                    yield (row >> vshift, (row >> n1) & cmask)
            else:
                for row in _bit_rref_rows(deps, L):
                    yield (row >> vshift, (row >> n1) & cmask)

    def _pairs_kernel_generic(self, ycols, k):
        f = self.field
        p = self.p
        n0, n1 = self.n0, self.rest_dims[0]
        rs, ts = self.rest_size, self.tail_size
        neg_y = [tuple((-x) % p for x in y) for y in ycols]
        for tail in self.tails():
            cols = list(self.slices) + neg_y
            for i in range(n1):
                col = [0] * rs
                for q in range(ts):
                    col[i * ts + q] = (-tail[q]) % p
                cols.append(tuple(col))
            m = Mat.from_cols(f, cols, rows=rs)
            kb = kernel_basis(m)
            for i in range(kb.rows):
                row = kb.row(i)
                yield (row[:n0], row[n0:n0 + k])


def _flat_rank_le1(field: Field, dims, flat) -> bool:
    """Tensor rank <= 1 test on flat row-major data."""
    if not any(flat):
        return True
    t = Tensor(field, tuple(dims), tuple(flat))
    return rank1_decompose(t) is not None


# -------------------------------------------------------------- the test

def _run_test(ctx: _Context, ycols, k: int, axis_cols, counters) -> Optional[Cpd]:
    """Greedy completion test for one assignment.

    axis_cols: callable returning, per axis 1..D-1, the k assignment
    columns (used only for witness reconstruction).  counters is a
    two-element list [states, pairs] updated in place."""
    n0 = ctx.n0
    f = ctx.field
    p = ctx.p
    counters[0] += 1
    rows = []
    if ctx.bit:
        red = {}
        for v, c in ctx.pairs(ycols, k):
            counters[1] += 1
            cur = v
            while cur:
                hb = 1 << (cur.bit_length() - 1)
                e = red.get(hb)
                if e is None:
                    break
                cur ^= e
            if cur:
                red[1 << (cur.bit_length() - 1)] = cur
                rows.append((unpack_bits(v, n0), unpack_bits(c, k)))
                if len(rows) == n0:
                    break
        if len(rows) < n0:
            return None
    else:
        basis = {}
        for v, c in ctx.pairs(ycols, k):
            counters[1] += 1
            red_v = _reduce_against(basis, list(v), p)
            if any(red_v):
                _basis_insert(basis, red_v, p, f.inv)
                rows.append((tuple(v), tuple(c)))
                if len(rows) == n0:
                    break
        if len(rows) < n0:
            return None
    # Reconstruct: row i of Q x_0 T minus the assignment part is rank <= 1.
    state = SearchState(
        Mat.from_rows(f, [r[0] for r in rows], cols=n0),
        Mat.from_rows(f, [r[1] for r in rows], cols=k),
        SearchStats(counters[0], counters[1], 0.0))
    q_inv = inverse(state.q_rows)
    d_rest = len(ctx.rest_dims)
    x_cols = [[] for _ in range(d_rest)]
    for vrow, crow in rows:
        flat = ctx.residual_flat(vrow, crow, ycols)
        fibers = rank1_decompose(Tensor(f, ctx.rest_dims, flat))
        assert fibers is not None, "good pair produced a residual of rank > 1"
        for a in range(d_rest):
            x_cols[a].append(fibers[a])
    cols_by_axis = axis_cols()
    factors = [q_inv @ hstack(Mat.identity(f, n0), state.c_rows)]
    for a in range(d_rest):
        x_mat = Mat.from_cols(f, x_cols[a], rows=ctx.rest_dims[a])
        y_mat = Mat.from_cols(f, cols_by_axis[a], rows=ctx.rest_dims[a])
        factors.append(hstack(x_mat, y_mat))
    return Cpd(f, tuple(factors))


# ------------------------------------------------------------- public ops

def _validate_search_input(t: Tensor):
    if t.ndim < 2:
        raise SearchInputError("search needs at least 2 axes")
    if any(t.dims[i] < t.dims[i + 1] for i in range(t.ndim - 1)):
        raise SearchInputError(f"dims {t.dims} are not nonincreasing")
    if any(n < 2 for n in t.dims):
        raise SearchInputError(f"dims {t.dims} must all be >= 2 (preprocess first)")
    for d in range(t.ndim):
        if rank(unfold(t, d)) != t.dims[d]:
            raise SearchInputError(f"input is not concise along axis {d}")


def good_pairs(t: Tensor, R: int, y: YAssignment,
               config: Optional[SearchConfig] = None) -> Iterator[tuple]:
    """Stream of good (v, c) row vectors for one assignment."""
    cfg = config or SearchConfig()
    ctx = _Context(t, R, cfg.force_branch)
    k = y.k
    ycols = [ctx.ycol_from_columns(tup) for tup in y.tuples]
    for v, c in ctx.pairs(ycols, k):
        if ctx.bit:
            yield (unpack_bits(v, ctx.n0), unpack_bits(c, k))
        else:
            yield (tuple(v), tuple(c))


def test_assignment(t: Tensor, R: int, y: YAssignment,
                    config: Optional[SearchConfig] = None,
                    stats: Optional[SearchStats] = None) -> Optional[Cpd]:
    """Decide whether the assignment completes to a rank-<=(n0+k) CPD of t;
    returns the witness CPD on success."""
    cfg = config or SearchConfig()
    ctx = _Context(t, R, cfg.force_branch)
    k = y.k
    ycols = [ctx.ycol_from_columns(tup) for tup in y.tuples]
    counters = [0, 0]
    cpd = _run_test(ctx, ycols, k,
                    lambda: y.columns_by_axis(len(ctx.rest_dims)), counters)
    if stats is not None:
        stats.states_tested += counters[0]
        stats.good_pairs += counters[1]
    return cpd


# ------------------------------------------------------------ the search

def _search_span(t: Tensor, R: int, cfg: SearchConfig, worker_id: int,
                 worker_count: int, cancel=None):
    """Scan the slice of the assignment stream owned by (shard, worker).

    Returns (cpd, found_stream_index, states, pairs, cancelled)."""
    ctx = _Context(t, R, cfg.force_branch)
    table = ctx.tuple_table()
    n_tuples = len(table)
    shard_i, shard_n = cfg.shard if cfg.shard else (0, 1)
    counters = [0, 0]
    best = None
    best_gi = -1
    gi = -1
    li = -1
    t0 = time.perf_counter()
    interval = cfg.progress_interval
    for k in range(R - ctx.n0 + 1):
        for combo in itertools.combinations(range(n_tuples), k):
            gi += 1
            if (gi - shard_i) % shard_n:
                continue
            li += 1
            if worker_count > 1 and li % worker_count != worker_id:
                continue
            if cancel is not None and not (li & 2047) and cancel.is_set():
                return (best, best_gi, counters[0], counters[1], True)
            ycols = [table[i][1] for i in combo]
            cpd = _run_test(
                ctx, ycols, k,
                lambda: [tuple(table[i][0][a] for i in combo)
                         for a in range(len(ctx.rest_dims))],
                counters)
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


def search_general(t: Tensor, R: int, config: Optional[SearchConfig] = None) -> SearchOutcome:
    """Decide rank(t) <= R for a concise tensor with nonincreasing dims.

    Returns a verified witness CPD (width n0 + k <= R) or NotFound.  With
    count_states set, the full stream is scanned even after a witness."""
    cfg = config or SearchConfig()
    _validate_search_input(t)
    t0 = time.perf_counter()
    if R < t.dims[0]:
        return SearchOutcome(None, SearchStats(0, 0, time.perf_counter() - t0))
    if cfg.threads <= 1:
        cpd, _, states, pairs, _ = _search_span(t, R, cfg, 0, 1)
    else:
        cpd, states, pairs = _search_parallel(_search_span, t, R, cfg)
    stats = SearchStats(states, pairs, time.perf_counter() - t0)
    if cpd is not None:
        assert cpd_verify(t, cpd), "search produced an invalid witness"
    return SearchOutcome(cpd, stats)


def _parallel_entry(args):
    span, t, R, cfg, wid, wcount, cancel = args
    out = span(t, R, cfg, wid, wcount, cancel)
    if out[0] is not None and cancel is not None and not cfg.count_states:
        cancel.set()
    return out


def _search_parallel(span, t: Tensor, R: int, cfg: SearchConfig):
    """Fan a span function out over cfg.threads worker processes.

    span(t, R, cfg, worker_id, worker_count, cancel) must return
    (cpd, found_stream_index, states, pairs, cancelled); the winner is the
    lowest found stream index."""
    import multiprocessing as mp

    with mp.Manager() as mgr:
        cancel = mgr.Event()
        args = [(span, t, R, cfg, w, cfg.threads, cancel)
                for w in range(cfg.threads)]
        with mp.Pool(processes=cfg.threads) as pool:
            results = pool.map(_parallel_entry, args)
    states = sum(r[2] for r in results)
    pairs = sum(r[3] for r in results)
    found = [(r[1], r[0]) for r in results if r[0] is not None]
    cpd = min(found)[1] if found else None
    return cpd, states, pairs
