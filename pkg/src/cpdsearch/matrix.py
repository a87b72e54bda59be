"""Dense matrices over GF(p) and the exact linear algebra used by the search.

Matrices are immutable; data is a flat row-major tuple. Zero-dimension
matrices (0 rows and/or 0 columns) are legal throughout.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import InfeasibleInnerDimError, ShapeError, SingularMatrixError
from .field import Field


@dataclass(frozen=True)
class Mat:
    field: Field
    rows: int
    cols: int
    data: tuple

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ShapeError(f"negative matrix shape {self.rows}x{self.cols}")
        if len(self.data) != self.rows * self.cols:
            raise ShapeError(
                f"data length {len(self.data)} != {self.rows}x{self.cols}")
        p = self.field.p
        for x in self.data:
            if not 0 <= x < p:
                raise ShapeError(f"entry {x!r} outside GF({p})")

    # ---- constructors -------------------------------------------------

    @staticmethod
    def from_rows(field: Field, rows: Sequence[Sequence[int]], cols: int | None = None) -> "Mat":
        rows = [tuple(r) for r in rows]
        if rows:
            cols = len(rows[0])
            for r in rows:
                if len(r) != cols:
                    raise ShapeError("ragged rows")
        elif cols is None:
            cols = 0
        flat = tuple(x % field.p for r in rows for x in r)
        return Mat(field, len(rows), cols, flat)

    @staticmethod
    def from_cols(field: Field, cols: Sequence[Sequence[int]], rows: int | None = None) -> "Mat":
        cols = [tuple(c) for c in cols]
        if cols:
            rows = len(cols[0])
            for c in cols:
                if len(c) != rows:
                    raise ShapeError("ragged columns")
        elif rows is None:
            rows = 0
        flat = tuple(cols[j][i] % field.p for i in range(rows) for j in range(len(cols)))
        return Mat(field, rows, len(cols), flat)

    @staticmethod
    def identity(field: Field, n: int) -> "Mat":
        return Mat(field, n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    @staticmethod
    def zeros(field: Field, rows: int, cols: int) -> "Mat":
        return Mat(field, rows, cols, (0,) * (rows * cols))

    # ---- access --------------------------------------------------------

    def __getitem__(self, ij) -> int:
        i, j = ij
        return self.data[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.data[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> tuple:
        return self.data[j::self.cols] if self.cols else ()

    def row_list(self) -> list:
        return [self.row(i) for i in range(self.rows)]

    @property
    def is_zero(self) -> bool:
        return not any(self.data)

    # ---- arithmetic ----------------------------------------------------

    def _compat(self, other: "Mat"):
        if self.field != other.field:
            raise ShapeError("field mismatch")

    def __matmul__(self, other: "Mat") -> "Mat":
        self._compat(other)
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        p = self.field.p
        ocols = other.cols
        out = []
        for i in range(self.rows):
            arow = self.row(i)
            for j in range(ocols):
                acc = 0
                for t in range(self.cols):
                    acc += arow[t] * other.data[t * ocols + j]
                out.append(acc % p)
        return Mat(self.field, self.rows, ocols, tuple(out))

    def __add__(self, other: "Mat") -> "Mat":
        self._compat(other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeError("shape mismatch in addition")
        p = self.field.p
        return Mat(self.field, self.rows, self.cols,
                   tuple((a + b) % p for a, b in zip(self.data, other.data)))

    def __sub__(self, other: "Mat") -> "Mat":
        self._compat(other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeError("shape mismatch in subtraction")
        p = self.field.p
        return Mat(self.field, self.rows, self.cols,
                   tuple((a - b) % p for a, b in zip(self.data, other.data)))

    def scale(self, c: int) -> "Mat":
        p = self.field.p
        c %= p
        return Mat(self.field, self.rows, self.cols, tuple((c * a) % p for a in self.data))

    def transpose(self) -> "Mat":
        return Mat(self.field, self.cols, self.rows,
                   tuple(self.data[i * self.cols + j]
                         for j in range(self.cols) for i in range(self.rows)))

    # ---- slicing helpers -------------------------------------------------

    def top_rows(self, k: int) -> "Mat":
        return Mat(self.field, k, self.cols, self.data[:k * self.cols])

    def left_cols(self, k: int) -> "Mat":
        return Mat(self.field, self.rows, k,
                   tuple(self.data[i * self.cols + j] for i in range(self.rows) for j in range(k)))


def hstack(a: Mat, b: Mat) -> Mat:
    if a.field != b.field or a.rows != b.rows:
        raise ShapeError("hstack needs matching fields and row counts")
    data = tuple(x for i in range(a.rows) for x in (a.row(i) + b.row(i)))
    return Mat(a.field, a.rows, a.cols + b.cols, data)


def vstack(a: Mat, b: Mat) -> Mat:
    if a.field != b.field or a.cols != b.cols:
        raise ShapeError("vstack needs matching fields and column counts")
    return Mat(a.field, a.rows + b.rows, a.cols, a.data + b.data)


# ------------------------------------------------------------------ rref

@dataclass(frozen=True)
class RrefResult:
    rref: Mat
    transform: Mat
    rank: int


def rref_transform(m: Mat) -> RrefResult:
    """Reduced row echelon form with the invertible transform.

    transform @ m == rref.  Elimination is deterministic: columns are
    scanned left to right and the pivot is the first unused row with a
    nonzero entry in the current column.
    """
    f = m.field
    p = f.p
    work = [list(m.row(i)) for i in range(m.rows)]
    trans = [[1 if i == j else 0 for j in range(m.rows)] for i in range(m.rows)]
    piv = 0
    for col in range(m.cols):
        sel = -1
        for i in range(piv, m.rows):
            if work[i][col]:
                sel = i
                break
        if sel < 0:
            continue
        if sel != piv:
            work[piv], work[sel] = work[sel], work[piv]
            trans[piv], trans[sel] = trans[sel], trans[piv]
        lead = work[piv][col]
        if lead != 1:
            s = f.inv(lead)
            work[piv] = [(s * x) % p for x in work[piv]]
            trans[piv] = [(s * x) % p for x in trans[piv]]
        prow = work[piv]
        ptrans = trans[piv]
        for i in range(m.rows):
            if i == piv:
                continue
            c = work[i][col]
            if c:
                work[i] = [(a - c * b) % p for a, b in zip(work[i], prow)]
                trans[i] = [(a - c * b) % p for a, b in zip(trans[i], ptrans)]
        piv += 1
        if piv == m.rows:
            break
    rr = Mat(f, m.rows, m.cols, tuple(x for row in work for x in row))
    tr = Mat(f, m.rows, m.rows, tuple(x for row in trans for x in row))
    return RrefResult(rr, tr, piv)


def rank(m: Mat) -> int:
    """Rank by plain elimination, no transform bookkeeping."""
    p = m.field.p
    f = m.field
    work = [list(m.row(i)) for i in range(m.rows)]
    piv = 0
    for col in range(m.cols):
        sel = -1
        for i in range(piv, m.rows):
            if work[i][col]:
                sel = i
                break
        if sel < 0:
            continue
        work[piv], work[sel] = work[sel], work[piv]
        lead = work[piv][col]
        if lead != 1:
            s = f.inv(lead)
            work[piv] = [(s * x) % p for x in work[piv]]
        prow = work[piv]
        for i in range(piv + 1, m.rows):
            c = work[i][col]
            if c:
                work[i] = [(a - c * b) % p for a, b in zip(work[i], prow)]
        piv += 1
        if piv == m.rows:
            break
    return piv


def inverse(m: Mat) -> Mat:
    if m.rows != m.cols:
        raise SingularMatrixError(f"cannot invert {m.rows}x{m.cols} matrix")
    res = rref_transform(m)
    if res.rank != m.rows:
        raise SingularMatrixError("matrix is singular")
    return res.transform


def kernel_basis(m: Mat) -> Mat:
    """Canonical basis of the right kernel: the unique rref matrix whose
    row space is {x : m @ x^T == 0}.  Has cols - rank rows."""
    f = m.field
    p = f.p
    res = rref_transform(m)
    r = res.rank
    rr = res.rref
    pivots = []
    for i in range(r):
        row = rr.row(i)
        for j in range(m.cols):
            if row[j]:
                pivots.append(j)
                break
    pivset = set(pivots)
    basis = []
    for free in range(m.cols):
        if free in pivset:
            continue
        vec = [0] * m.cols
        vec[free] = 1
        for t, pc in enumerate(pivots):
            vec[pc] = (-rr[t, free]) % p
        basis.append(vec)
    raw = Mat.from_rows(f, basis, cols=m.cols)
    return rref_transform(raw).rref


# ------------------------------------------------- rank normal form

@dataclass(frozen=True)
class RankNormalForm:
    left: Mat
    right: Mat
    rank: int


def rank_normal_form(m: Mat) -> RankNormalForm:
    """Invertible left (rows x rows) and right (cols x cols) with
    left @ m @ right == [[I_r, 0], [0, 0]]."""
    f = m.field
    p = f.p
    res = rref_transform(m)
    r = res.rank
    rr = res.rref
    pivots = []
    for i in range(r):
        row = rr.row(i)
        for j in range(m.cols):
            if row[j]:
                pivots.append(j)
                break
    pivset = set(pivots)
    # Columns of the right transform: pivot unit vectors first, then the
    # standard kernel vector for each free column.
    cols = []
    for pc in pivots:
        vec = [0] * m.cols
        vec[pc] = 1
        cols.append(vec)
    for free in range(m.cols):
        if free in pivset:
            continue
        vec = [0] * m.cols
        vec[free] = 1
        for t, pc in enumerate(pivots):
            vec[pc] = (-rr[t, free]) % p
        cols.append(vec)
    right = Mat.from_cols(f, cols, rows=m.cols)
    return RankNormalForm(res.transform, right, r)


# ------------------------------------------------- enumeration streams

def _reduce_against(basis: dict, vec: list, p: int) -> list:
    """Reduce vec against a dict {lead index: monic row}. Returns the
    reduced vector (possibly zero)."""
    n = len(vec)
    i = 0
    while i < n:
        if vec[i] == 0:
            i += 1
            continue
        row = basis.get(i)
        if row is None:
            break
        c = vec[i]
        vec = [(a - c * b) % p for a, b in zip(vec, row)]
        i += 1
    return vec


def _basis_insert(basis: dict, vec: list, p: int, inv):
    """Insert a (nonzero) reduced vector, scaled monic, keyed by lead."""
    for i, x in enumerate(vec):
        if x:
            s = inv(x)
            basis[i] = [(s * a) % p for a in vec]
            return


def enumerate_full_rank(field: Field, r: int, k: int) -> Iterator[Mat]:
    """All r x k matrices of full row rank r, lexicographic by row-major data."""
    if r > k:
        return
    p = field.p
    inv = field.inv

    def rec(chosen_rows, basis):
        depth = len(chosen_rows)
        if depth == r:
            yield Mat.from_rows(field, chosen_rows, cols=k)
            return
        for cand in itertools.product(range(p), repeat=k):
            red = _reduce_against(basis, list(cand), p)
            if not any(red):
                continue
            sub = dict(basis)
            _basis_insert(sub, red, p, inv)
            yield from rec(chosen_rows + [cand], sub)

    yield from rec([], {})


def solve_right_factors(u: Mat, target: Mat) -> Iterator[Mat]:
    """All V with u @ V == target, streamed in lexicographic order of the
    free block of the parametrization.  Empty stream when unsolvable;
    |F|^((k - rank u) * n) solutions otherwise."""
    if u.field != target.field or u.rows != target.rows:
        raise ShapeError("solve_right_factors needs matching fields and row counts")
    f = u.field
    p = f.p
    k, n = u.cols, target.cols
    nf = rank_normal_form(u)
    s = nf.rank
    mprime = nf.left @ target
    # Solvable iff rows s.. of left @ target vanish.
    if any(mprime.data[s * n:]):
        return
    top = mprime.top_rows(s)
    free_rows = k - s
    for flat in itertools.product(range(p), repeat=free_rows * n):
        vprime = Mat(f, k, n, top.data + flat)
        yield nf.right @ vprime


def enumerate_factorizations(m: Mat, k: int) -> Iterator[tuple]:
    """All pairs (U, V) with U: rows x k, V: k x cols and U @ V == m.

    Every pair appears exactly once.  Raises when k < rank(m)."""
    f = m.field
    nf = rank_normal_form(m)
    r = nf.rank
    if k < r:
        raise InfeasibleInnerDimError(f"inner dimension {k} below rank {r}")
    a, b = m.rows, m.cols
    left_inv = inverse(nf.left)
    right_inv = inverse(nf.right)
    # In normal-form coordinates M' = [[I_r, 0], [0, 0]]; split U' at row r.
    # The top block U'0 must have full row rank; V' then solves
    # U'0 V' = [I_r | 0]; the bottom block U'1 solves U'1 V' = 0.
    ident_block = hstack(Mat.identity(f, r), Mat.zeros(f, r, b - r))
    for u0 in enumerate_full_rank(f, r, k):
        for vprime in solve_right_factors(u0, ident_block):
            vt = vprime.transpose()
            zero_rhs = Mat.zeros(f, b, a - r)
            for u1t in solve_right_factors(vt, zero_rhs):
                uprime = vstack(u0, u1t.transpose())
                yield (left_inv @ uprime, vprime @ right_inv)
