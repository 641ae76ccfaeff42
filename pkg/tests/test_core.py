from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, strategies as st

from qoa.core import (BiDegree, Poly, binom, colored_partition_count, enumerate_partitions,
                      falling, format_rational, partition_count, to_rational)


def test_to_rational_parses_exactly():
    assert to_rational("-3/4") == Fraction(-3, 4)
    assert to_rational(5) == 5
    with pytest.raises(TypeError):
        to_rational(0.5)
    with pytest.raises(TypeError):
        to_rational(True)


def test_format_rational():
    assert format_rational(Fraction(6, 3)) == "2"
    assert format_rational(Fraction(-1, 2)) == "-1/2"


@given(st.integers(-20, 20), st.integers(0, 8))
def test_binom_matches_falling_over_factorial(n, k):
    from math import factorial
    assert binom(n, k) * factorial(k) == falling(n, k)
    if n >= 0:
        assert binom(n, k) == comb(n, k)


def test_bidegree_shift_and_add():
    d = BiDegree(1, 2)
    assert d.shift(0) == BiDegree(1, 1)
    assert (d + BiDegree(-1, 2)).weight == 4
    assert d.odd and not BiDegree(2, 0).odd


def test_poly_ring_and_evaluation():
    k = Poly.gen("k")
    p = (k - 26) * Fraction(1, 12) + 1
    assert p.evaluate(26) == 1
    assert (k * k - k * k) == 0
    assert Poly({0: Fraction(3)}) == 3
    assert not (k - k)


@given(st.integers(0, 18), st.integers(1, 4))
def test_partition_enumeration_and_counts(n, m):
    parts = enumerate_partitions(n, m)
    assert len(parts) == partition_count(n, m)
    assert len(set(parts)) == len(parts)
    assert all(sum(p) == n and min(p, default=m) >= m for p in parts)
    assert all(list(p) == sorted(p, reverse=True) for p in parts)
    distinct = enumerate_partitions(n, m, distinct=True)
    assert all(len(set(p)) == len(p) for p in distinct)


def test_partition_examples():
    assert enumerate_partitions(4, 2) == [(4,), (2, 2)]
    assert [partition_count(n) for n in range(8)] == [1, 1, 2, 3, 5, 7, 11, 15]


def test_colored_partitions_against_enumeration():
    # coloured partitions: sum over partitions of prod_parts-multiplicity choices
    from collections import Counter
    for n in range(7):
        for colors in (1, 2, 3):
            total = 0
            for p in enumerate_partitions(n):
                prod = 1
                for _, mult in Counter(p).items():
                    prod *= comb(mult + colors - 1, colors - 1)
                total += prod
            assert colored_partition_count(n, colors) == total


def test_p24_values():
    assert [colored_partition_count(n, 24) for n in range(4)] == [1, 24, 324, 3200]
