"""Exact scalars, bidegrees and partition enumeration.

Every coefficient in the package is a :class:`fractions.Fraction` (or an
``int``), or a :class:`Poly` when a central charge is carried as a free
parameter.  Nothing is ever converted to floating point.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

Rational = Fraction

__all__ = [
    "Rational",
    "BiDegree",
    "Poly",
    "to_rational",
    "format_rational",
    "enumerate_partitions",
    "partition_count",
    "colored_partition_count",
    "falling",
    "binom",
    "factorial",
]


def to_rational(x):
    """Parse ``x`` (int, Fraction, or a string such as ``"-3/4"``) exactly."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        raise TypeError("floating point values are not accepted; pass a string or Fraction")
    raise TypeError(f"cannot interpret {x!r} as a rational")


def format_rational(x) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def falling(n: int, k: int) -> int:
    """n (n-1) ... (n-k+1); equals 1 for k == 0."""
    out = 1
    for i in range(k):
        out *= n - i
    return out


def binom(n: int, k: int) -> int:
    """Generalised binomial coefficient, valid for negative ``n``."""
    if k < 0:
        return 0
    if n >= 0:
        return comb(n, k) if k <= n else 0
    return falling(n, k) // factorial(k)


@dataclass(frozen=True, order=True)
class BiDegree:
    """(fermion degree, weight) of a homogeneous element."""

    fermion: int
    weight: Fraction

    def __post_init__(self):
        object.__setattr__(self, "weight", Fraction(self.weight))

    def __add__(self, other: "BiDegree") -> "BiDegree":
        return BiDegree(self.fermion + other.fermion, self.weight + other.weight)

    def shift(self, n: int) -> "BiDegree":
        """Bidegree of the n-th mode / circle product: weight drops by n+1."""
        return BiDegree(self.fermion, self.weight - n - 1)

    @property
    def odd(self) -> bool:
        return self.fermion % 2 == 1


class Poly:
    """Univariate polynomial with rational coefficients in a named parameter.

    Used to carry a central charge symbolically through the operator engine.
    Supports the ring operations the engine needs and compares equal to plain
    rationals when constant.
    """

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs=None, var: str = "k"):
        if coeffs is None:
            coeffs = {}
        elif not isinstance(coeffs, dict):
            coeffs = {0: coeffs}
        self.coeffs = {d: Fraction(c) for d, c in coeffs.items() if c != 0}
        self.var = var

    @classmethod
    def gen(cls, var: str = "k") -> "Poly":
        return cls({1: 1}, var)

    def _lift(self, other):
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly({0: other}, self.var)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out = dict(self.coeffs)
        for d, c in other.coeffs.items():
            out[d] = out.get(d, 0) + c
        return Poly(out, self.var)

    __radd__ = __add__

    def __neg__(self):
        return Poly({d: -c for d, c in self.coeffs.items()}, self.var)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        out: dict[int, Fraction] = {}
        for d1, c1 in self.coeffs.items():
            for d2, c2 in other.coeffs.items():
                out[d1 + d2] = out.get(d1 + d2, 0) + c1 * c2
        return Poly(out, self.var)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return Poly({d: Fraction(c) / other for d, c in self.coeffs.items()}, self.var)
        return NotImplemented

    def __bool__(self):
        return bool(self.coeffs)

    def __eq__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return False
        return self.coeffs == other.coeffs

    def __hash__(self):
        if set(self.coeffs) <= {0}:
            return hash(self.coeffs.get(0, Fraction(0)))
        return hash(tuple(sorted(self.coeffs.items())))

    def evaluate(self, value) -> Fraction:
        value = Fraction(value)
        return sum((c * value**d for d, c in self.coeffs.items()), Fraction(0))

    def is_constant(self) -> bool:
        return set(self.coeffs) <= {0}

    def constant(self) -> Fraction:
        return self.coeffs.get(0, Fraction(0))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for d in sorted(self.coeffs, reverse=True):
            c = format_rational(self.coeffs[d])
            if d == 0:
                parts.append(c)
            elif d == 1:
                parts.append(f"{c}*{self.var}")
            else:
                parts.append(f"{c}*{self.var}^{d}")
        return " + ".join(parts)


def enumerate_partitions(n: int, min_part: int = 1, distinct: bool = False,
                         max_part: int | None = None) -> list[tuple[int, ...]]:
    """All partitions of ``n`` into parts >= ``min_part``.

    Partitions are weakly (strictly, if ``distinct``) decreasing tuples and
    are returned in lexicographically descending order, e.g. for n=4,
    min_part=2: ``[(4,), (2, 2)]``.  ``n < 0`` gives ``[]``.
    """
    if min_part < 1:
        raise ValueError("min_part must be positive")
    if max_part is None:
        max_part = n
    return list(_partitions(n, min_part, distinct, max_part))


@lru_cache(maxsize=None)
def _partitions(n, min_part, distinct, max_part):
    if n < 0:
        return ()
    if n == 0:
        return ((),)
    out = []
    for first in range(min(n, max_part), min_part - 1, -1):
        nxt = first - 1 if distinct else first
        for rest in _partitions(n - first, min_part, distinct, nxt):
            out.append((first,) + rest)
    return tuple(out)


def partition_count(n: int, min_part: int = 1, distinct: bool = False) -> int:
    return len(_partitions(n, min_part, distinct, n)) if n >= 0 else 0


@lru_cache(maxsize=None)
def colored_partition_count(n: int, colors: int) -> int:
    """Coefficient of q^n in prod_{m>=1} (1-q^m)^(-colors), computed by the
    standard divisor-sum recurrence (independent of any enumeration)."""
    if n < 0:
        return 0
    if n == 0:
        return 1
    total = 0
    for k in range(1, n + 1):
        sigma = sum(d for d in range(1, k + 1) if k % d == 0)
        total += colors * sigma * colored_partition_count(n - k, colors)
    assert total % n == 0
    return total // n
