"""Tokenizer and parser for words and expressions.

Grammar (``*`` between factors is optional)::

    word     := factor ("*"? factor)*
    factor   := atom ("^" exponent)? "-"?
    atom     := IDENT | "1" | "[" word "," word "]" | "(" word ")"
    exponent := "-"? INT | "(" "-"? INT ("/" INT)? ")"

A trailing ``-`` inverts the factor.  ``[x,y]`` is ``x^-1 y^-1 x y``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, TypeVar, Union

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>!=|[*^()\[\],/=-]))")


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        loc = f"{line}:{col}: " if line else (f"col {col}: " if col else "")
        super().__init__(f"{loc}{msg}")


@dataclass(frozen=True)
class Gen:
    name: str


@dataclass(frozen=True)
class One:
    pass


@dataclass(frozen=True)
class Mul:
    factors: tuple


@dataclass(frozen=True)
class Pow:
    base: object
    exp: Fraction


@dataclass(frozen=True)
class Comm:
    left: object
    right: object


Node = Union[Gen, One, Mul, Pow, Comm]


def tokenize(text: str, line: int = 0) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos + 1)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, line=0):
        self.toks = tokens
        self.i = 0
        self.line = line

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else (None, None, self._end_col())

    def _end_col(self):
        if not self.toks:
            return 1
        kind, val, col = self.toks[-1]
        return col + len(val)

    def take(self, value=None, kind=None):
        tk = self.peek()
        if tk[0] is None or (value is not None and tk[1] != value) or (kind is not None and tk[0] != kind):
            want = value or kind
            raise ParseError(f"expected {want!r}, found {tk[1]!r}", self.line, tk[2])
        self.i += 1
        return tk

    def at_factor_start(self):
        kind, val, _ = self.peek()
        return kind == "ident" or (kind == "int" and val == "1") or val in ("[", "(")

    def word(self):
        factors = [self.factor()]
        while True:
            if self.peek()[1] == "*":
                self.take("*")
                factors.append(self.factor())
            elif self.at_factor_start():
                factors.append(self.factor())
            else:
                break
        return factors[0] if len(factors) == 1 else Mul(tuple(factors))

    def factor(self):
        kind, val, col = self.peek()
        if kind == "ident":
            self.take()
            node = Gen(val)
        elif kind == "int" and val == "1":
            self.take()
            node = One()
        elif val == "[":
            self.take("[")
            left = self.word()
            self.take(",")
            right = self.word()
            self.take("]")
            node = Comm(left, right)
        elif val == "(":
            self.take("(")
            node = self.word()
            self.take(")")
        else:
            raise ParseError(f"unexpected token {val!r}", self.line, col)
        if self.peek()[1] == "^":
            self.take("^")
            node = Pow(node, self.exponent())
        if self.peek()[1] == "-" and not (self.peek(1)[0] == "int"):
            self.take("-")
            node = Pow(node, Fraction(-1))
        return node

    def exponent(self):
        if self.peek()[1] == "(":
            self.take("(")
            sign = -1 if self.peek()[1] == "-" else 1
            if sign < 0:
                self.take("-")
            num = int(self.take(kind="int")[1])
            den = 1
            if self.peek()[1] == "/":
                self.take("/")
                tk = self.take(kind="int")
                den = int(tk[1])
                if den == 0:
                    raise ParseError("zero denominator", self.line, tk[2])
            self.take(")")
            return Fraction(sign * num, den)
        sign = -1 if self.peek()[1] == "-" else 1
        if sign < 0:
            self.take("-")
        return Fraction(sign * int(self.take(kind="int")[1]))


def parse_word(text: str, line: int = 0) -> Node:
    toks = tokenize(text, line)
    p = _Parser(toks, line)
    node = p.word()
    if p.i != len(toks):
        kind, val, col = p.peek()
        raise ParseError(f"unexpected token {val!r}", line, col)
    return node


T = TypeVar("T")


def evaluate(node: Node, gen: Callable[[str], T], one: Callable[[], T], mul, power, inverse) -> T:
    """Fold an AST with the supplied group operations."""

    def ev(n):
        if isinstance(n, Gen):
            return gen(n.name)
        if isinstance(n, One):
            return one()
        if isinstance(n, Mul):
            acc = ev(n.factors[0])
            for f in n.factors[1:]:
                acc = mul(acc, ev(f))
            return acc
        if isinstance(n, Pow):
            return power(ev(n.base), n.exp)
        if isinstance(n, Comm):
            x, y = ev(n.left), ev(n.right)
            return mul(mul(inverse(x), inverse(y)), mul(x, y))
        raise TypeError(n)

    return ev(node)


def symbols(node: Node) -> set[str]:
    if isinstance(node, Gen):
        return {node.name}
    if isinstance(node, Mul):
        return set().union(*(symbols(f) for f in node.factors))
    if isinstance(node, Pow):
        return symbols(node.base)
    if isinstance(node, Comm):
        return symbols(node.left) | symbols(node.right)
    return set()


def to_letters(node: Node, index: Callable[[str], int]) -> tuple[int, ...]:
    """Raw letter sequence of an integer-exponent word (no free reduction)."""

    def power(w, e):
        if e.denominator != 1:
            raise ParseError(f"fractional exponent {e} not allowed here")
        k = int(e)
        if k < 0:
            w = tuple(-x for x in reversed(w))
            k = -k
        return w * k

    return evaluate(
        node,
        gen=lambda name: (index(name),),
        one=lambda: (),
        mul=lambda a, b: a + b,
        power=power,
        inverse=lambda w: tuple(-x for x in reversed(w)),
    )
