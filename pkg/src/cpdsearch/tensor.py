"""Dense tensors over GF(p), CPDs, and the exact multilinear operations.

Tensor data is a flat row-major tuple (last axis fastest).  A CPD is a
tuple of factor matrices, one per axis, all with the same column count R;
the represented tensor is the sum over r of the outer products of the
r-th columns.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Optional, Sequence

from .errors import ShapeError
from .field import Field
from .matrix import Mat


@dataclass(frozen=True)
class Tensor:
    field: Field
    dims: tuple
    data: tuple

    def __post_init__(self):
        if len(self.dims) < 1:
            raise ShapeError("tensors need at least one axis")
        if any(n < 0 for n in self.dims):
            raise ShapeError(f"negative dimension in {self.dims}")
        if len(self.data) != prod(self.dims):
            raise ShapeError(
                f"data length {len(self.data)} != product of dims {self.dims}")
        p = self.field.p
        for x in self.data:
            if not 0 <= x < p:
                raise ShapeError(f"entry {x!r} outside GF({p})")

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return len(self.data)

    @property
    def is_zero(self) -> bool:
        return not any(self.data)

    def strides(self) -> tuple:
        out = [1] * len(self.dims)
        for d in range(len(self.dims) - 2, -1, -1):
            out[d] = out[d + 1] * self.dims[d + 1]
        return tuple(out)

    def __getitem__(self, idx) -> int:
        st = self.strides()
        return self.data[sum(i * s for i, s in zip(idx, st))]

    @staticmethod
    def zeros(field: Field, dims: Sequence[int]) -> "Tensor":
        dims = tuple(dims)
        return Tensor(field, dims, (0,) * prod(dims))


@dataclass(frozen=True)
class Cpd:
    field: Field
    factors: tuple

    def __post_init__(self):
        if not self.factors:
            raise ShapeError("a CPD needs at least one factor matrix")
        r = self.factors[0].cols
        for f in self.factors:
            if not isinstance(f, Mat) or f.field != self.field:
                raise ShapeError("factors must be matrices over the CPD field")
            if f.cols != r:
                raise ShapeError("factor matrices must share a column count")

    @property
    def rank(self) -> int:
        return self.factors[0].cols

    @property
    def dims(self) -> tuple:
        return tuple(f.rows for f in self.factors)


# ------------------------------------------------------------------ ops

def contract(m: Mat, axis: int, t: Tensor) -> Tensor:
    """Multiply axis `axis` of t by m: out[.., i', ..] = sum_i m[i', i] t[.., i, ..]."""
    if m.field != t.field:
        raise ShapeError("field mismatch in contract")
    if not 0 <= axis < t.ndim:
        raise ShapeError(f"axis {axis} out of range for {t.dims}")
    if m.cols != t.dims[axis]:
        raise ShapeError(f"matrix cols {m.cols} != axis length {t.dims[axis]}")
    p = t.field.p
    new_dims = t.dims[:axis] + (m.rows,) + t.dims[axis + 1:]
    stride = t.strides()[axis]
    n_old = t.dims[axis]
    outer = prod(t.dims[:axis])
    inner = stride  # product of dims after `axis`
    block_old = n_old * inner
    block_new = m.rows * inner
    out = [0] * (outer * block_new)
    for o in range(outer):
        src = o * block_old
        dst = o * block_new
        for inew in range(m.rows):
            mrow = m.row(inew)
            for q in range(inner):
                acc = 0
                for iold in range(n_old):
                    c = mrow[iold]
                    if c:
                        acc += c * t.data[src + iold * inner + q]
                out[dst + inew * inner + q] = acc % p
    return Tensor(t.field, new_dims, tuple(out))


def transpose(t: Tensor, perm: Sequence[int]) -> Tensor:
    perm = tuple(perm)
    if sorted(perm) != list(range(t.ndim)):
        raise ShapeError(f"{perm} is not a permutation of axes of {t.dims}")
    st = t.strides()
    new_dims = tuple(t.dims[d] for d in perm)
    new_st = tuple(st[d] for d in perm)
    out = []
    idx = [0] * len(perm)
    total = prod(new_dims)
    off = 0
    for _ in range(total):
        out.append(t.data[off])
        for d in range(len(perm) - 1, -1, -1):
            idx[d] += 1
            off += new_st[d]
            if idx[d] < new_dims[d]:
                break
            idx[d] = 0
            off -= new_dims[d] * new_st[d]
    return Tensor(t.field, new_dims, tuple(out))


def unfold(t: Tensor, d: int) -> Mat:
    """Axis-d unfolding: rows indexed by axis d, columns by the remaining
    axes in ascending order, row-major."""
    if not 0 <= d < t.ndim:
        raise ShapeError(f"axis {d} out of range for {t.dims}")
    st = t.strides()
    rest_axes = [a for a in range(t.ndim) if a != d]
    rest_dims = [t.dims[a] for a in rest_axes]
    cols = prod(rest_dims)
    n = t.dims[d]
    out = []
    for i in range(n):
        base = i * st[d]
        idx = [0] * len(rest_axes)
        off = base
        for _ in range(cols):
            out.append(t.data[off])
            for k in range(len(rest_axes) - 1, -1, -1):
                idx[k] += 1
                off += st[rest_axes[k]]
                if idx[k] < rest_dims[k]:
                    break
                idx[k] = 0
                off -= rest_dims[k] * st[rest_axes[k]]
    return Mat(t.field, n, cols, tuple(out))


def outer_flat(field: Field, vectors: Sequence[Sequence[int]]) -> tuple:
    """Flat row-major outer product of one vector per axis."""
    p = field.p
    acc = (1,)
    for v in vectors:
        acc = tuple((a * x) % p for a in acc for x in v)
    return acc


def cpd_eval(c: Cpd) -> Tensor:
    p = c.field.p
    dims = c.dims
    total = prod(dims)
    out = [0] * total
    for r in range(c.rank):
        cols = [f.col(r) for f in c.factors]
        term = outer_flat(c.field, cols)
        for q in range(total):
            x = term[q]
            if x:
                out[q] = (out[q] + x) % p
    return Tensor(c.field, dims, tuple(out))


def cpd_verify(t: Tensor, c: Cpd) -> bool:
    if c.field != t.field:
        raise ShapeError("field mismatch between tensor and CPD")
    if c.dims != t.dims:
        raise ShapeError(f"CPD dims {c.dims} != tensor dims {t.dims}")
    return cpd_eval(c).data == t.data


def rank1_decompose(t: Tensor) -> Optional[tuple]:
    """Vectors (u_0, .., u_{D-1}) whose outer product equals t, or None when
    t has rank above 1.  The zero tensor decomposes into all-zero vectors."""
    f = t.field
    p = f.p
    if t.is_zero:
        return tuple((0,) * n for n in t.dims)
    first = next(q for q, x in enumerate(t.data) if x)
    st = t.strides()
    coords = []
    q = first
    for d in range(t.ndim):
        coords.append(q // st[d])
        q %= st[d]
    alpha = t.data[first]
    base = first
    fibers = []
    for d in range(t.ndim):
        off = base - coords[d] * st[d]
        fibers.append(tuple(t.data[off + j * st[d]] for j in range(t.dims[d])))
    # The fiber product overcounts by alpha^(D-1); fold the correction into u_0.
    scale = pow(f.inv(alpha), t.ndim - 1, p)
    fibers[0] = tuple((scale * x) % p for x in fibers[0])
    if outer_flat(f, fibers) != t.data:
        return None
    return tuple(fibers)
