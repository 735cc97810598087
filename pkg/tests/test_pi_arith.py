from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from freeqpi.pi_arith import (
    MalformedRational,
    PiSet,
    PiViolation,
    as_fraction,
    in_qpi,
    pi_rational,
    zpi_nth,
    zpi_upto,
)


def test_piset_sorted_and_prime():
    assert PiSet([3, 2, 3]).primes == (2, 3)
    assert str(PiSet.parse("5,2")) == "2,5"
    with pytest.raises(ValueError):
        PiSet([4])
    with pytest.raises(ValueError):
        PiSet([1])


def test_in_qpi_examples():
    assert in_qpi(Fraction(3, 4), PiSet([2]))
    assert not in_qpi(Fraction(1, 3), PiSet([2]))
    assert in_qpi(Fraction(7), PiSet())


def test_zero_denominator():
    with pytest.raises(MalformedRational):
        in_qpi((1, 0), PiSet([2]))
    with pytest.raises(MalformedRational):
        as_fraction("1/0")


def test_pi_rational_rejects():
    assert pi_rational("3/2", PiSet([2])) == Fraction(3, 2)
    with pytest.raises(PiViolation):
        pi_rational("1/3", PiSet([2]))


def test_zpi_nth_examples():
    assert [zpi_nth(PiSet([2]), n) for n in range(1, 5)] == [1, 2, 4, 8]
    assert [zpi_nth(PiSet([2, 3]), n) for n in range(1, 7)] == [1, 2, 3, 4, 6, 8]
    assert zpi_nth(PiSet(), 1) == 1
    with pytest.raises(ValueError):
        zpi_nth(PiSet(), 2)


def test_zpi_upto_brute():
    pi = PiSet([2, 5])
    want = [n for n in range(2, 101) if pi.admits(n)]
    assert zpi_upto(pi, 100, lo=2) == want


pis = st.sets(st.sampled_from([2, 3, 5, 7]), max_size=3).map(PiSet)


@st.composite
def qpi_pairs(draw):
    pi = draw(pis)
    dens = [1] + [p ** k for p in pi for k in range(1, 4)]
    q = [Fraction(draw(st.integers(-30, 30)), draw(st.sampled_from(dens))) for _ in range(2)]
    return pi, q[0], q[1]


@given(qpi_pairs())
def test_closure(args):
    pi, a, b = args
    assert in_qpi(a, pi) and in_qpi(b, pi)
    assert in_qpi(a * b, pi)
    assert in_qpi(a + b, pi)


@given(pis, st.integers(1, 25))
def test_monotone_and_invertible(pi, n):
    if len(pi) == 0:
        return
    m = zpi_nth(pi, n)
    assert m < zpi_nth(pi, n + 1)
    assert in_qpi(Fraction(1, m), pi)
