"""Arithmetic for the ring Q_pi and the multiplicative monoid Z_pi."""

from __future__ import annotations

import heapq
from fractions import Fraction
from typing import Iterable, Iterator


class PiViolation(ValueError):
    """A rational or an integer degree falls outside Q_pi / Z_pi."""


class MalformedRational(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of |n|, ascending."""
    n = abs(n)
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1 if f == 2 else 2
    if n > 1:
        out.append(n)
    return out


class PiSet:
    """A finite set of primes, kept sorted and duplicate-free."""

    __slots__ = ("primes",)

    def __init__(self, primes: Iterable[int] = ()):
        ps = sorted(set(int(p) for p in primes))
        for p in ps:
            if not is_prime(p):
                raise ValueError(f"{p} is not a prime")
        self.primes: tuple[int, ...] = tuple(ps)

    @classmethod
    def parse(cls, text: str) -> "PiSet":
        text = text.strip()
        if not text:
            return cls()
        return cls(int(tok) for tok in text.split(","))

    def __contains__(self, p: object) -> bool:
        return p in self.primes

    def __iter__(self) -> Iterator[int]:
        return iter(self.primes)

    def __len__(self) -> int:
        return len(self.primes)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PiSet) and self.primes == other.primes

    def __hash__(self) -> int:
        return hash(self.primes)

    def __repr__(self) -> str:
        return f"PiSet({list(self.primes)})"

    def __str__(self) -> str:
        return ",".join(map(str, self.primes))

    def admits(self, n: int) -> bool:
        """True iff the positive integer n lies in Z_pi."""
        if n <= 0:
            return False
        for p in self.primes:
            while n % p == 0:
                n //= p
        return n == 1


def as_fraction(q) -> Fraction:
    if isinstance(q, tuple):
        num, den = q
        if den == 0:
            raise MalformedRational("zero denominator")
        return Fraction(num, den)
    if isinstance(q, str):
        try:
            return Fraction(q)
        except ZeroDivisionError as exc:
            raise MalformedRational(q) from exc
    return Fraction(q)


def in_qpi(q, pi: PiSet) -> bool:
    """True iff every prime factor of the denominator of q lies in pi."""
    return pi.admits(as_fraction(q).denominator)


def pi_rational(q, pi: PiSet) -> Fraction:
    """Coerce q to a Fraction and check it lies in Q_pi."""
    f = as_fraction(q)
    if not pi.admits(f.denominator):
        raise PiViolation(f"{f} is not in Q_pi for pi = {{{pi}}}")
    return f


def zpi_iter(pi: PiSet) -> Iterator[int]:
    """Elements of Z_pi in increasing order, starting with 1."""
    heap = [1]
    seen = {1}
    while heap:
        m = heapq.heappop(heap)
        yield m
        for p in pi.primes:
            nm = m * p
            if nm not in seen:
                seen.add(nm)
                heapq.heappush(heap, nm)


def zpi_nth(pi: PiSet, n: int) -> int:
    """The n-th smallest element m_n of Z_pi (m_1 = 1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    for i, m in enumerate(zpi_iter(pi), start=1):
        if i == n:
            return m
    raise ValueError(f"Z_pi has fewer than {n} elements for empty pi")


def zpi_upto(pi: PiSet, cap: int, lo: int = 1) -> list[int]:
    out = []
    for m in zpi_iter(pi):
        if m > cap:
            break
        if m >= lo:
            out.append(m)
    return out
