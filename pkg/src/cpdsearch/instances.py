"""Benchmark tensors, reference decompositions, and deterministic randomness."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ShapeError
from .field import GF, Field
from .matrix import Mat, rank
from .tensor import Cpd, Tensor, contract

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Counter-based PRNG (SplitMix64, Steele et al.).  The state advances
    by a fixed odd constant and the output is a bijective mix of it, so
    streams are reproducible across runs and platforms."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform draw from range(n) by rejection."""
        if n <= 0:
            raise ValueError("below() needs a positive bound")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n


# ------------------------------------------------------------ tensors

def mmt(m: int, k: int, n: int, field: Field) -> Tensor:
    """Matrix multiplication tensor <m,k,n> with dims (mk, kn, nm).

    Entry 1 exactly at (i*k + j, j*n + l, l*m + i)."""
    if min(m, k, n) < 1:
        raise ShapeError("matrix multiplication sizes must be positive")
    dims = (m * k, k * n, n * m)
    data = [0] * (dims[0] * dims[1] * dims[2])
    for i in range(m):
        for j in range(k):
            for l in range(n):
                a = i * k + j
                b = j * n + l
                c = l * m + i
                data[(a * dims[1] + b) * dims[2] + c] = 1
    return Tensor(field, dims, tuple(data))


_LYSIKOV_ONES = (
    (0, 0, 0),
    (1, 0, 1), (1, 1, 0),
    (2, 0, 2), (2, 2, 0),
    (3, 0, 3), (3, 1, 2), (3, 2, 1), (3, 3, 0),
)


def lysikov(field: Field) -> Tensor:
    """The 4x4x4 tensor whose slices are the staircase of antidiagonals;
    rank 7 over characteristic != 2 but 8 over GF(2)."""
    data = [0] * 64
    for (s, i, j) in _LYSIKOV_ONES:
        data[(s * 4 + i) * 4 + j] = 1
    return Tensor(field, (4, 4, 4), tuple(data))


def random_tensor(dims, field: Field, seed: int) -> Tensor:
    rng = SplitMix64(seed)
    total = 1
    for n in dims:
        total *= n
    return Tensor(field, tuple(dims), tuple(rng.below(field.p) for _ in range(total)))


def runtime_exponent(m: int, k: int, n: int, R: int) -> float:
    """3 * log(R) / log(mkn): the matrix multiplication exponent implied by
    a rank-R CPD of <m,k,n>."""
    return 3.0 * math.log(R) / math.log(m * k * n)


# ------------------------------------------------------------ scrambling

def random_gl(n: int, field: Field, seed: int) -> Mat:
    """Uniform invertible n x n matrix by rejection sampling."""
    rng = SplitMix64(seed)
    if n == 0:
        return Mat(field, 0, 0, ())
    while True:
        m = Mat(field, n, n, tuple(rng.below(field.p) for _ in range(n * n)))
        if rank(m) == n:
            return m


@dataclass(frozen=True)
class ScrambleResult:
    tensor: Tensor
    transforms: tuple


def scramble(t: Tensor, seed: int) -> ScrambleResult:
    """Apply an independent random invertible transform to every axis.
    Rank is preserved."""
    rng = SplitMix64(seed)
    axis_seeds = [rng.next_u64() for _ in t.dims]
    transforms = tuple(random_gl(n, t.field, s) for n, s in zip(t.dims, axis_seeds))
    out = t
    for d, q in enumerate(transforms):
        out = contract(q, d, out)
    return ScrambleResult(out, transforms)


# ---------------------------------------------------- known decompositions

def mmt222_rank7_cpd() -> Cpd:
    """A verified rank-7 CPD of <2,2,2> over GF(2)."""
    f = GF(2)
    a0 = Mat.from_rows(f, [
        [0, 0, 1, 0, 0, 1, 0],
        [1, 0, 1, 1, 1, 0, 0],
        [0, 1, 0, 1, 0, 1, 1],
        [0, 1, 0, 0, 1, 0, 0],
    ])
    a1 = Mat.from_rows(f, [
        [1, 0, 1, 1, 0, 0, 1],
        [1, 0, 1, 1, 0, 1, 0],
        [1, 1, 0, 1, 0, 0, 1],
        [1, 0, 0, 0, 1, 0, 0],
    ])
    a2 = Mat.from_rows(f, [
        [0, 0, 1, 1, 0, 1, 1],
        [0, 1, 0, 0, 0, 0, 1],
        [1, 0, 0, 1, 0, 1, 1],
        [1, 0, 0, 1, 1, 0, 1],
    ])
    return Cpd(f, (a0, a1, a2))


def lysikov_rank8_cpd() -> Cpd:
    """A verified rank-8 CPD of the lysikov tensor over GF(2).
    The last two factors happen to coincide."""
    f = GF(2)
    a0 = Mat.from_rows(f, [
        [1, 0, 0, 0, 0, 0, 0, 0],
        [1, 0, 0, 1, 0, 0, 1, 0],
        [1, 0, 1, 0, 0, 1, 0, 0],
        [1, 1, 0, 0, 1, 1, 1, 1],
    ])
    a1 = Mat.from_rows(f, [
        [1, 1, 1, 1, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 0, 1, 1],
        [0, 0, 1, 0, 0, 1, 0, 1],
        [0, 1, 0, 0, 1, 0, 0, 0],
    ])
    return Cpd(f, (a0, a1, a1))
