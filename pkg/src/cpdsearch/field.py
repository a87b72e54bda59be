"""Prime field arithmetic. Elements of GF(p) are plain ints in range(p)."""
from __future__ import annotations

from functools import lru_cache

from .errors import FieldError

# Moduli must fit in 16 bits so inverse tables stay small.
MAX_MODULUS = 65535


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


class Field:
    """GF(p) with a full inverse table built at construction."""

    __slots__ = ("p", "_inv")

    def __init__(self, p: int):
        if not isinstance(p, int) or p < 2 or p > MAX_MODULUS:
            raise FieldError(f"modulus must be an int in [2, {MAX_MODULUS}], got {p!r}")
        if not _is_prime(p):
            raise FieldError(f"modulus {p} is not prime")
        self.p = p
        inv = [0] * p
        for x in range(1, p):
            inv[x] = pow(x, p - 2, p)
        self._inv = tuple(inv)

    def check(self, x: int) -> int:
        if not isinstance(x, int) or not 0 <= x < self.p:
            raise FieldError(f"{x!r} is not an element of GF({self.p})")
        return x

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return (-a) % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroDivisionError(f"0 has no inverse in GF({self.p})")
        return self._inv[a % self.p]

    def div(self, a: int, b: int) -> int:
        return (a * self.inv(b)) % self.p

    def elements(self) -> range:
        return range(self.p)

    def __eq__(self, other) -> bool:
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("Field", self.p))

    def __repr__(self) -> str:
        return f"GF({self.p})"

    def __reduce__(self):
        # Pickle back through the cache so worker processes share instances.
        return (GF, (self.p,))


@lru_cache(maxsize=None)
def GF(p: int) -> Field:
    """Cached Field constructor."""
    return Field(p)
