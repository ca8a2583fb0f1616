"""Exact scalar arithmetic: the rationals and prime fields.

Scalars are plain Python objects (int / Fraction for Q, int in [0, p) for
F_p); a Field object bundles the operations so matrix code stays generic.
No floating point anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

Scalar = Union[int, Fraction]


class RationalField:
    """The field Q. Scalars are int or Fraction; ints are kept as long as
    no division forces a Fraction (the common case in monomial complexes)."""

    char = 0
    name = "Q"

    zero = 0
    one = 1

    @staticmethod
    def add(a: Scalar, b: Scalar) -> Scalar:
        return a + b

    @staticmethod
    def sub(a: Scalar, b: Scalar) -> Scalar:
        return a - b

    @staticmethod
    def mul(a: Scalar, b: Scalar) -> Scalar:
        return a * b

    @staticmethod
    def neg(a: Scalar) -> Scalar:
        return -a

    @staticmethod
    def inv(a: Scalar) -> Scalar:
        if a == 1:
            return 1
        if a == -1:
            return -1
        return Fraction(1) / a

    @staticmethod
    def div(a: Scalar, b: Scalar) -> Scalar:
        if b == 1:
            return a
        if b == -1:
            return -a
        return Fraction(a) / b

    @staticmethod
    def is_zero(a: Scalar) -> bool:
        return a == 0

    @staticmethod
    def from_int(n: int) -> Scalar:
        return n

    @staticmethod
    def normalize(a: Scalar) -> Scalar:
        # collapse integral Fractions back to int so the int fast path stays hot
        if isinstance(a, Fraction) and a.denominator == 1:
            return int(a)
        return a

    @staticmethod
    def to_str(a: Scalar) -> str:
        return str(a)

    def __repr__(self) -> str:
        return "QQ"


class PrimeField:
    """F_p for prime p. Scalars are ints in [0, p)."""

    def __init__(self, p: int):
        if p < 2:
            raise ValueError("field characteristic must be a prime >= 2")
        # cheap primality check; inputs are user-supplied CLI values
        d = 2
        while d * d <= p:
            if p % d == 0:
                raise ValueError(f"{p} is not prime")
            d += 1
        self.p = p
        self.char = p
        self.name = f"F{p}"
        self.zero = 0
        self.one = 1 % p

    def add(self, a: int, b: int) -> int:
        c = a + b
        return c - self.p if c >= self.p else c

    def sub(self, a: int, b: int) -> int:
        c = a - b
        return c + self.p if c < 0 else c

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def neg(self, a: int) -> int:
        return self.p - a if a else 0

    def inv(self, a: int) -> int:
        return pow(a, -1, self.p)

    def div(self, a: int, b: int) -> int:
        return (a * pow(b, -1, self.p)) % self.p

    @staticmethod
    def is_zero(a: int) -> bool:
        return a == 0

    def from_int(self, n: int) -> int:
        return n % self.p

    @staticmethod
    def normalize(a: int) -> int:
        return a

    @staticmethod
    def to_str(a: int) -> str:
        return str(a)

    def __repr__(self) -> str:
        return f"GF({self.p})"

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self) -> int:
        return hash(("PrimeField", self.p))


QQ = RationalField()

_GF_CACHE: dict[int, PrimeField] = {}


def GF(p: int) -> PrimeField:
    f = _GF_CACHE.get(p)
    if f is None:
        f = _GF_CACHE[p] = PrimeField(p)
    return f


def field_from_name(name: str):
    """Parse a field spec string: "Q" or "Fp <p>" / "F<p>"."""
    t = name.strip()
    if t in ("Q", "QQ", "q"):
        return QQ
    if t.startswith("F"):
        try:
            return GF(int(t[1:]))
        except ValueError as e:
            raise ValueError(f"bad field name {name!r}: {e}") from None
    raise ValueError(f"bad field name {name!r}")
