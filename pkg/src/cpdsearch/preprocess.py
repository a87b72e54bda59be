"""Concise reduction of a tensor and lifting of CPDs back to the original.

Every tensor is equivalent, under invertible per-axis transforms, to a
concise core whose axis-d unfoldings all have full row rank.  Rank is
preserved, so the search only ever runs on the core.  Axes whose rank is
0 or 1 are squeezed out of the core (a zero tensor collapses to the empty
vector); the remaining axes are sorted by nonincreasing length.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod

from .errors import NotACpdError, ShapeError
from .matrix import Mat, inverse, rref_transform
from .tensor import Cpd, Tensor, cpd_eval, contract, transpose, unfold


@dataclass(frozen=True)
class ConciseReduction:
    original: Tensor
    transforms: tuple   # per original axis d: invertible n_d x n_d Q_d
    ranks: tuple        # per original axis d: rank of the axis-d unfolding
    axis_order: tuple   # original axes kept in the core, sorted by rank desc
    squeezed: tuple     # original axes dropped from the core (rank 1 there)
    reduced: Tensor

    @property
    def is_zero(self) -> bool:
        return any(r == 0 for r in self.ranks)


def concise_reduce(t: Tensor) -> ConciseReduction:
    """Reduce t to its concise core.

    reduced dims are nonincreasing; every unfolding of reduced has full
    row rank.  A zero tensor reduces to the empty vector (dims (0,)); a
    nonzero tensor whose core is a scalar reduces to a length-1 vector.
    """
    transforms = []
    ranks = []
    for d in range(t.ndim):
        res = rref_transform(unfold(t, d))
        transforms.append(res.transform)
        ranks.append(res.rank)
    if any(r == 0 for r in ranks):
        reduced = Tensor(t.field, (0,), ())
        return ConciseReduction(t, tuple(transforms), tuple(ranks), (), (), reduced)
    core = t
    for d in range(t.ndim):
        core = contract(transforms[d].top_rows(ranks[d]), d, core)
    kept = [d for d in range(t.ndim) if ranks[d] >= 2]
    squeezed = [d for d in range(t.ndim) if ranks[d] == 1]
    if not kept:
        # rank-1 original: keep one length-1 axis so the core stays a tensor
        kept = [squeezed.pop(0)]
    kept.sort(key=lambda d: -ranks[d])  # stable: ties keep axis order
    # Squeezed axes go last; with length 1 they do not disturb row-major data.
    core = transpose(core, kept + squeezed)
    reduced = Tensor(t.field, tuple(ranks[d] for d in kept), core.data)
    return ConciseReduction(t, tuple(transforms), tuple(ranks),
                            tuple(kept), tuple(squeezed), reduced)


def rank_lower_bound(red: ConciseReduction) -> int:
    """max over core dims; 0 for the (empty) zero core."""
    if red.reduced.size == 0:
        return 0
    return max(red.reduced.dims)


def lift_cpd(red: ConciseReduction, c: Cpd) -> Cpd:
    """Turn a CPD of red.reduced into a CPD of red.original."""
    t = red.original
    if c.field != t.field:
        raise NotACpdError("field mismatch")
    if c.dims != red.reduced.dims or cpd_eval(c).data != red.reduced.data:
        raise NotACpdError("factors do not evaluate to the reduced tensor")
    r_width = c.rank
    f = t.field
    if red.is_zero:
        factors = tuple(Mat.zeros(f, n, r_width) for n in t.dims)
        return Cpd(f, factors)
    ones = Mat(f, 1, r_width, (1,) * r_width)
    factors = []
    for d in range(t.ndim):
        if d in red.axis_order:
            core_factor = c.factors[red.axis_order.index(d)]
        else:
            core_factor = ones
        lift = inverse(red.transforms[d]).left_cols(red.ranks[d])
        factors.append(lift @ core_factor)
    out = Cpd(f, tuple(factors))
    if cpd_eval(out).data != t.data:
        raise NotACpdError("lifted factors do not evaluate to the original tensor")
    return out


def trivial_cpd(t: Tensor) -> Cpd:
    """CPD from the axis-0 fibers: one column per nonzero fiber, paired with
    the matching standard basis vectors on the other axes.  Width is at most
    the product of the non-leading dims."""
    f = t.field
    n0 = t.dims[0]
    rest = t.dims[1:]
    rest_size = prod(rest)
    cols0 = []
    basis_cols = [[] for _ in rest]
    for q in range(rest_size):
        fiber = tuple(t.data[i * rest_size + q] for i in range(n0))
        if not any(fiber):
            continue
        cols0.append(fiber)
        qq = q
        coords = []
        for n in reversed(rest):
            coords.append(qq % n)
            qq //= n
        coords.reverse()
        for a, n in enumerate(rest):
            basis_cols[a].append(tuple(1 if j == coords[a] else 0 for j in range(n)))
    factors = [Mat.from_cols(f, cols0, rows=n0)]
    for a, n in enumerate(rest):
        factors.append(Mat.from_cols(f, basis_cols[a], rows=n))
    return Cpd(f, tuple(factors))
