"""Elements of the free Q_pi-group F^{Q_pi} with rational exponents.

A :class:`QGroup` owns the most recent tower of its lineage; roots are adjoined
lazily by :meth:`QGroup.qexp` and every element is lifted to the newest tower
before arithmetic.
"""

from __future__ import annotations

import threading
from math import gcd
from fractions import Fraction
from typing import Iterable, Optional, Union

from .pi_arith import PiSet, pi_rational
from .syntax import Comm, Gen, Mul, One, Pow, parse_word
from .tower import IDENTITY, Tower, TowerWord


class LineageError(ValueError):
    """Elements from towers that do not extend one another."""


class QGroup:
    def __init__(self, generators: Iterable[str], pi: Union[PiSet, Iterable[int], str] = ()):
        if isinstance(pi, str):
            pi = PiSet.parse(pi)
        elif not isinstance(pi, PiSet):
            pi = PiSet(pi)
        self.pi = pi
        self._tower = Tower(list(generators), pi)
        self._lock = threading.Lock()
        self._parent: Optional[QGroup] = None

    @property
    def tower(self) -> Tower:
        return self._tower

    def __repr__(self) -> str:
        return f"QGroup({list(self._tower.base_alphabet.names)}, pi={{{self.pi}}}, rank={self._tower.rank})"

    def identity(self) -> "QElement":
        return QElement(self, self._tower, IDENTITY)

    def gen(self, name: str) -> "QElement":
        tw = self._tower
        return QElement(self, tw, tw.normal_form((tw.alphabet.letter(name),)))

    def element(self, text: str) -> "QElement":
        """Parse a word; rational exponents such as ``a^(1/2)`` adjoin roots."""
        node = parse_word(text) if text.strip() else One()
        return self._eval(node)

    def _eval(self, node) -> "QElement":
        if isinstance(node, One):
            return self.identity()
        if isinstance(node, Gen):
            return self.gen(node.name)
        if isinstance(node, Mul):
            acc = self.identity()
            for f in node.factors:
                acc = acc * self._eval(f)
            return acc
        if isinstance(node, Pow):
            return self.qexp(self._eval(node.base), node.exp)
        if isinstance(node, Comm):
            return commutator(self._eval(node.left), self._eval(node.right))
        raise TypeError(node)

    # -- lineage

    def fork(self, tower: Optional[Tower] = None) -> "QGroup":
        """A child group starting from ``tower`` (an extension of this group's tower).

        Elements of this group lift into the child; the child's adjunctions stay private.
        """
        tower = self._tower if tower is None else tower
        if not tower.extends(self._tower):
            raise LineageError("fork tower does not extend the group's tower")
        child = QGroup.__new__(QGroup)
        child.pi = self.pi
        child._tower = tower
        child._lock = threading.Lock()
        child._parent = self
        return child

    def _descends_from(self, other: "QGroup") -> bool:
        g = self
        while g is not None:
            if g is other:
                return True
            g = g._parent
        return False

    def lift(self, x: "QElement") -> "QElement":
        """Re-home x on the newest tower; normal forms are stable under extension."""
        if not self._descends_from(x.group):
            raise LineageError("element belongs to another group")
        tw = self._tower
        if x.tower is tw:
            return x if x.group is self else QElement(self, tw, x.word)
        if not tw.extends(x.tower):
            raise LineageError("tower lineages diverge")
        return QElement(self, tw, x.word)

    def _extend(self, before: Tower, base: TowerWord, degree: int) -> Tower:
        with self._lock:
            if self._tower is not before:
                return self._tower
            self._tower = self._tower.adjoin_root(base, degree)
            return self._tower

    # -- exponentiation

    def qexp(self, g: "QElement", alpha) -> "QElement":
        """``g^alpha`` for alpha in Q_pi, adjoining at most one root."""
        alpha = pi_rational(alpha, self.pi)
        g = self.lift(g)
        if g.word.is_identity() or alpha == 0:
            return self.identity()
        if alpha.denominator == 1:
            return QElement(self, g.tower, g.tower.power(g.word, alpha.numerator))
        while True:
            tw = self._tower
            h, r, m = tw.root(g.word)
            p, q = alpha.numerator, alpha.denominator
            num = m * p
            if num % q == 0:
                w = tw.mul(h, tw.power(r, num // q), tw.inverse(h))
                return QElement(self, tw, w)
            d = q // gcd(q, num)
            new = self._extend(tw, r, d)
            if new.rank == tw.rank + 1 and new.adjunctions[-1].base == r:
                t = new.normal_form((new.letter_of(new.rank),))
                w = new.mul(h, new.power(t, num * d // q), new.inverse(h))
                return QElement(self, new, w)
            # someone else extended the tower first; retry on the newest tower
            g = self.lift(g)


class QElement:
    __slots__ = ("group", "tower", "word")

    def __init__(self, group: QGroup, tower: Tower, word: TowerWord):
        self.group = group
        self.tower = tower
        self.word = word

    def _pair(self, other: "QElement") -> tuple[Tower, TowerWord, TowerWord]:
        if other.group is not self.group:
            raise LineageError("elements of different groups")
        a, b = self.tower, other.tower
        if a.extends(b):
            return a, self.word, other.word
        if b.extends(a):
            return b, self.word, other.word
        raise LineageError("tower lineages diverge")

    def __mul__(self, other: "QElement") -> "QElement":
        tw, x, y = self._pair(other)
        return QElement(self.group, tw, tw.mul(x, y))

    def inverse(self) -> "QElement":
        return QElement(self.group, self.tower, self.tower.inverse(self.word))

    def __invert__(self) -> "QElement":
        return self.inverse()

    def __pow__(self, alpha) -> "QElement":
        if isinstance(alpha, int):
            return QElement(self.group, self.tower, self.tower.power(self.word, alpha))
        return self.group.qexp(self, alpha)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QElement):
            return NotImplemented
        _, x, y = self._pair(other)
        return x == y

    def __hash__(self) -> int:
        return hash(self.word)

    def is_identity(self) -> bool:
        return self.word.is_identity()

    def format(self) -> str:
        return self.tower.format(self.word)

    def __str__(self) -> str:
        return self.format()

    def __repr__(self) -> str:
        return f"QElement({self.format()!r})"


def qexp(g: QElement, alpha: Union[Fraction, int, str]) -> QElement:
    return g.group.qexp(g, alpha)


def is_identity(g: QElement) -> bool:
    return g.is_identity()


def commutator(x: QElement, y: QElement) -> QElement:
    """``x^-1 y^-1 x y``."""
    return x.inverse() * y.inverse() * x * y
