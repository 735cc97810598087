"""Equation systems over free Q_pi-groups and the transformations of the decision pipeline.

A system is a list of equations ``w = 1`` whose words are sequences of :class:`Term`
(a symbol to a rational power).  Symbols are generators, declared variables, or
declared roots ``r = (u)^(1/s)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count
from math import prod
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .pi_arith import PiSet, PiViolation, in_qpi, zpi_upto
from .qgroup import LineageError, QElement, QGroup
from .tower import IDENTITY, Tower, TowerWord


class SystemError_(ValueError):
    """Malformed equation system."""


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class Term:
    name: str
    exp: Fraction = Fraction(1)

    def inverse(self) -> "Term":
        return Term(self.name, -self.exp)

    def format(self) -> str:
        e = self.exp
        if e == 1:
            return self.name
        if e.denominator == 1:
            return f"{self.name}^{e.numerator}"
        return f"{self.name}^({e.numerator}/{e.denominator})"


Word = tuple  # tuple[Term, ...]


def word_inverse(w: Sequence[Term]) -> Word:
    return tuple(t.inverse() for t in reversed(w))


def format_word(w: Sequence[Term]) -> str:
    return "*".join(t.format() for t in w) if w else "1"


@dataclass(frozen=True)
class RootDecl:
    """``name = (base)^(1/degree)``."""

    name: str
    base: Word
    degree: int

    def format(self) -> str:
        return f"root {self.name} = ({format_word(self.base)})^(1/{self.degree})"


@dataclass(frozen=True)
class EquationSystem:
    generators: tuple
    pi: PiSet
    variables: tuple
    equations: tuple  # tuple[Word, ...], each meaning word = 1
    inequations: tuple = ()
    roots: tuple = ()  # tuple[RootDecl, ...]

    def __post_init__(self):
        known = set(self.generators) | set(self.variables)
        seen = set(known)
        if len(seen) != len(self.generators) + len(self.variables):
            raise SystemError_("symbol declared twice")
        for r in self.roots:
            for t in r.base:
                if t.name not in seen:
                    raise SystemError_(f"undeclared symbol {t.name!r}")
            if r.name in seen:
                raise SystemError_(f"symbol declared twice: {r.name!r}")
            seen.add(r.name)
        for eq in self.equations:
            for t in eq:
                if t.name not in seen:
                    raise SystemError_(f"undeclared symbol {t.name!r}")
        for v in self.inequations:
            if v not in self.variables:
                raise SystemError_(f"inequation on non-variable {v!r}")

    @property
    def M(self) -> int:
        return len(self.equations)

    def is_variable(self, name: str) -> bool:
        return name in self.variables

    def root(self, name: str) -> Optional[RootDecl]:
        for r in self.roots:
            if r.name == name:
                return r
        return None

    def coefficient_terms(self) -> list[Term]:
        out: list[Term] = []
        for eq in self.equations:
            for t in eq:
                if t.name not in self.variables and t not in out:
                    out.append(t)
        return out

    def is_free_coefficients(self) -> bool:
        """All coefficients are integer powers of generators (they lie in F)."""
        gens = set(self.generators)
        return not self.roots and all(
            t.name in gens and t.exp.denominator == 1 for t in self.coefficient_terms()
        )

    def to_text(self) -> str:
        lines = ["generators " + " ".join(self.generators)]
        if len(self.pi):
            lines.append("pi " + ",".join(str(p) for p in self.pi))
        if self.variables:
            lines.append("vars " + " ".join(self.variables))
        lines.extend(r.format() for r in self.roots)
        lines.extend(f"{format_word(eq)} = 1" for eq in self.equations)
        lines.extend(f"{v} != 1" for v in self.inequations)
        return "\n".join(lines) + "\n"


def make_system(
    generators: Iterable[str],
    pi,
    variables: Iterable[str],
    equations: Iterable[Iterable],
    inequations: Iterable[str] = (),
    roots: Iterable[RootDecl] = (),
) -> EquationSystem:
    """Convenience constructor; equation items are Terms or ``(name, exp)`` pairs."""
    if not isinstance(pi, PiSet):
        pi = PiSet.parse(pi) if isinstance(pi, str) else PiSet(pi)
    eqs = tuple(tuple(t if isinstance(t, Term) else Term(t[0], Fraction(t[1])) for t in eq) for eq in equations)
    return EquationSystem(tuple(generators), pi, tuple(variables), eqs, tuple(inequations), tuple(roots))


def _fresh(taken: set, prefix: str) -> Iterator[str]:
    for i in count(1):
        name = f"{prefix}{i}"
        if name not in taken:
            taken.add(name)
            yield name


# ---------------------------------------------------------------- evaluation


def coefficient_values(sys: EquationSystem, group: QGroup) -> dict[str, QElement]:
    """Values of generators and declared roots in ``group``."""
    vals: dict[str, QElement] = {g: group.gen(g) for g in sys.generators}
    for r in sys.roots:
        base = eval_word(r.base, vals, group)
        vals[r.name] = group.qexp(base, Fraction(1, r.degree))
    return vals


def eval_word(w: Sequence[Term], values: Mapping[str, QElement], group: QGroup) -> QElement:
    acc = group.identity()
    for t in w:
        x = values[t.name]
        acc = acc * (x ** t.exp if t.exp.denominator == 1 else group.qexp(x, t.exp))
    return acc


def check_solution(sys: EquationSystem, group: QGroup, assignment: Mapping[str, QElement]) -> bool:
    """Every equation evaluates to the identity and every inequation holds."""
    vals = coefficient_values(sys, group)
    for v in sys.variables:
        if v not in assignment:
            raise KeyError(f"no value for variable {v!r}")
        vals[v] = group.lift(assignment[v])
    for eq in sys.equations:
        if not eval_word(eq, vals, group).is_identity():
            return False
    return all(not vals[v].is_identity() for v in sys.inequations)


# ---------------------------------------------------------------- elimination


@dataclass(frozen=True)
class FreshDefinition:
    """A fresh variable introduced by a transformation and the word it stands for."""

    name: str
    word: Word


@dataclass(frozen=True)
class Transformed:
    """Result of a transformation with its solution maps.

    ``extend`` computes values of the fresh variables from a solution of the source system;
    ``project`` forgets them.
    """

    system: EquationSystem
    source: EquationSystem
    fresh: tuple  # tuple[FreshDefinition, ...]

    def project(self, assignment: Mapping) -> dict:
        return {v: assignment[v] for v in self.source.variables}

    def extend(self, assignment: Mapping[str, QElement], group: QGroup) -> dict:
        vals = coefficient_values(self.source, group)
        vals.update({k: group.lift(v) for k, v in assignment.items()})
        out = dict(assignment)
        for fd in self.fresh:
            val = eval_word(fd.word, vals, group)
            vals[fd.name] = val
            out[fd.name] = val
        return out


def eliminate_coefficients(sys: EquationSystem) -> Transformed:
    """Replace every non-integral coefficient power and every declared root by a fresh variable.

    A coefficient ``c = w^(m/n)`` becomes z with ``z^n = w^m``; a variable power ``x^(m/n)``
    becomes y with ``y^n = x^m``.  Roots of unique-root groups are unique, so solutions
    correspond one to one (forgetting the fresh variables).
    """
    for eq in sys.equations:
        for t in eq:
            if not in_qpi(t.exp, sys.pi):
                raise PiViolation(f"exponent {t.exp} of {t.name} is not in Q_pi")
    for r in sys.roots:
        if not sys.pi.admits(r.degree):
            raise PiViolation(f"degree {r.degree} of root {r.name} is not in Z_pi")
    taken = set(sys.generators) | set(sys.variables) | {r.name for r in sys.roots}
    names = _fresh(taken, "z")
    variables = list(sys.variables)
    new_eqs: list[Word] = []
    fresh: list[FreshDefinition] = []
    root_var: dict[str, str] = {}
    frac_var: dict[tuple[str, Fraction], str] = {}

    def term(t: Term) -> Word:
        name = root_var.get(t.name, t.name)
        e = t.exp
        if e.denominator == 1:
            return (Term(name, e),)
        key = (name, abs(e))
        z = frac_var.get(key)
        if z is None:
            z = next(names)
            frac_var[key] = z
            variables.append(z)
            m, n = abs(e.numerator), e.denominator
            new_eqs.append((Term(z, Fraction(n)), Term(name, Fraction(-m))))
            fresh.append(FreshDefinition(z, (Term(t.name, abs(e)),)))
        return (Term(z, Fraction(1 if e > 0 else -1)),)

    for r in sys.roots:
        z = next(names)
        base = tuple(x for t in r.base for x in term(t))
        root_var[r.name] = z
        variables.append(z)
        new_eqs.append((Term(z, Fraction(r.degree)),) + word_inverse(base))
        fresh.append(FreshDefinition(z, (Term(r.name, Fraction(1)),)))
    body = [tuple(x for t in eq for x in term(t)) for eq in sys.equations]
    out = EquationSystem(
        sys.generators, sys.pi, tuple(variables), tuple(body + new_eqs), sys.inequations, ()
    )
    return Transformed(out, sys, tuple(fresh))


def triangularize(sys: EquationSystem) -> Transformed:
    """Split every equation with more than three terms: ``w1 w2 v^-1 = 1``, ``v w3 ... wk = 1``."""
    if not sys.is_free_coefficients():
        raise SystemError_("coefficients must lie in F; run eliminate_coefficients first")
    taken = set(sys.generators) | set(sys.variables)
    names = _fresh(taken, "v")
    variables = list(sys.variables)
    eqs: list[Word] = []
    fresh: list[FreshDefinition] = []
    for eq in sys.equations:
        rest = tuple(eq)
        while len(rest) > 3:
            v = next(names)
            variables.append(v)
            eqs.append((rest[0], rest[1], Term(v, Fraction(-1))))
            fresh.append(FreshDefinition(v, (rest[0], rest[1])))
            rest = (Term(v, Fraction(1)),) + rest[2:]
        eqs.append(rest)
    out = EquationSystem(sys.generators, sys.pi, tuple(variables), tuple(eqs), sys.inequations, ())
    return Transformed(out, sys, tuple(fresh))


def is_triangular(sys: EquationSystem) -> bool:
    return sys.is_free_coefficients() and all(len(eq) <= 3 for eq in sys.equations)


# ---------------------------------------------------------------- tau order


@dataclass(frozen=True)
class SolutionVector:
    assignment: dict
    tau: tuple
    tower: Tower = field(compare=False, default=None)

    @classmethod
    def of(cls, assignment: Mapping[str, QElement], tower: Optional[Tower] = None) -> "SolutionVector":
        if tower is None:
            towers = [x.tower for x in assignment.values()]
            tower = max(towers, key=lambda t: t.rank) if towers else None
        if tower is None:
            return cls(dict(assignment), (), None)
        tau = tuple(
            sum(tower.t_length(x.word, j) for x in assignment.values()) for j in range(1, tower.rank + 1)
        )
        return cls(dict(assignment), tau, tower)


def _tower_check(a: SolutionVector, b: SolutionVector) -> None:
    if a.tower is not None and b.tower is not None:
        if not (a.tower.extends(b.tower) or b.tower.extends(a.tower)):
            raise LineageError("solutions over unrelated towers")


def _padded(a: tuple, b: tuple) -> tuple[tuple, tuple]:
    n = max(len(a), len(b))
    return a + (0,) * (n - len(a)), b + (0,) * (n - len(b))


def tau_compare(a: SolutionVector, b: SolutionVector) -> int:
    """Total order on tau vectors: by sum, then lexicographically.  Returns -1, 0 or 1."""
    _tower_check(a, b)
    x, y = _padded(a.tau, b.tau)
    kx, ky = (sum(x), x), (sum(y), y)
    return (kx > ky) - (kx < ky)


def tau_product_order(a: SolutionVector, b: SolutionVector) -> str:
    """Componentwise comparison: 'less', 'greater', 'equal' or 'incomparable'."""
    _tower_check(a, b)
    x, y = _padded(a.tau, b.tau)
    if x == y:
        return "equal"
    if all(p <= q for p, q in zip(x, y)):
        return "less"
    if all(p >= q for p, q in zip(x, y)):
        return "greater"
    return "incomparable"


# ---------------------------------------------------------------- rank reduction

# A reference to an H-piece: ("sym", name, sign) for a symbol or its inverse,
# ("const", word) for a constant word of coefficient letters.


def _ref_text(ref) -> str:
    if ref[0] == "const":
        return ref[2]
    name, sign = ref[1], ref[2]
    return name if sign == 1 else f"{name}^-1"


def _lin_text(expr: Mapping[str, int], rhs: int = 0) -> str:
    parts = []
    for name in sorted(expr):
        c = expr[name]
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        parts.append(f"{sign} {name}" if mag == 1 else f"{sign} {mag}*{name}")
    if not parts:
        return f"0 = {rhs}"
    s = " ".join(parts)
    s = s[2:] if s.startswith("+ ") else "-" + s[2:]
    return f"{s} = {rhs}"


@dataclass
class RankReduction:
    """Output of one rank-reduction step at rank j.

    ``first_type``: var -> piece symbols, ``var = Y1 T1 Y2 ...`` (free words over the d's and t's).
    ``second_type``: (symbol ref, q) meaning ``symbol = u_j^q``.
    ``residual``: triangles over ``H_{j-1}`` (tuples of refs, product = 1).
    ``linear``: (expr, rhs) integer relations ``sum c*E = rhs``.
    ``memberships``: (symbol, allowed letter names) for ``symbol in F_{j-1}``.
    ``commutations``: (T symbol, t_j name) for ``[T, t_j] = 1``.
    ``t_powers``: T symbol -> exponent variable, ``T = t_j^E``.
    """

    rank: int
    letter: str
    degree: int
    base: str
    first_type: dict = field(default_factory=dict)
    second_type: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    linear: list = field(default_factory=list)
    memberships: list = field(default_factory=list)
    commutations: list = field(default_factory=list)
    t_powers: dict = field(default_factory=dict)
    passthrough: list = field(default_factory=list)
    values: dict = field(default_factory=dict)
    kept: list = field(default_factory=list)  # variables already below the rank
    inequations: list = field(default_factory=list)  # original variables required != 1

    def symbols(self) -> set:
        out = set(self.t_powers)
        for pieces in self.first_type.values():
            out.update(p for p in pieces)
        for tri in self.residual:
            out.update(r[1] for r in tri if r[0] == "sym")
        for ref, _ in self.second_type:
            if ref[0] == "sym":
                out.add(ref[1])
        return out

    def int_symbols(self) -> set:
        out = set(self.t_powers.values())
        for expr, _ in self.linear:
            out.update(expr)
        out.update(q for _, q in self.second_type)
        return out

    def to_text(self) -> str:
        lines = [f"rank {self.rank} letter {self.letter} degree {self.degree} base {self.base}"]
        for var in sorted(self.first_type):
            lines.append(f"first {var} = {'*'.join(self.first_type[var]) or '1'}")
        for t in sorted(self.t_powers):
            lines.append(f"power {t} = {self.letter}^{self.t_powers[t]}")
        for ref, q in self.second_type:
            lines.append(f"second {_ref_text(ref)} = u^{q}")
        for tri in self.residual:
            lines.append(f"residual {'*'.join(_ref_text(r) for r in tri) or '1'} = 1")
        for tri in self.passthrough:
            lines.append(f"pass {format_word(tri)} = 1")
        for expr, rhs in self.linear:
            lines.append(f"linear {_lin_text(expr, rhs)}")
        for sym, letters in self.memberships:
            lines.append(f"member {sym} in <{' '.join(letters)}>")
        for sym, letter in self.commutations:
            lines.append(f"commute [{sym},{letter}] = 1")
        for var in self.inequations:
            lines.append(f"ineq {var} != 1")
        return "\n".join(lines) + "\n"

    # -- solution maps

    def _h_value(self, tower: Tower, ref, values: Mapping) -> TowerWord:
        if ref[0] == "const":
            return tower.normal_form(ref[1])
        x = values[ref[1]]
        return x if ref[2] == 1 else tower.inverse(x)

    def check(self, tower: Tower, values: Mapping) -> bool:
        """Whether ``values`` (symbol -> TowerWord, int symbol -> int) satisfies the emitted system."""
        j = self.rank
        u = tower.base_of(j)
        t = tower.normal_form((tower.letter_of(j),))
        for tsym, e in self.t_powers.items():
            if values[tsym] != tower.power(t, values[e]):
                return False
        for ref, q in self.second_type:
            if self._h_value(tower, ref, values) != tower.power(u, values[q]):
                return False
        for tri in self.residual:
            if not tower.mul(*(self._h_value(tower, r, values) for r in tri)).is_identity():
                return False
        for expr, rhs in self.linear:
            if sum(c * values[n] for n, c in expr.items()) != rhs:
                return False
        for sym, _ in self.memberships:
            if values[sym].rank >= j:
                return False
        for sym, _ in self.commutations:
            if tower.mul(values[sym], t) != tower.mul(t, values[sym]):
                return False
        if self.inequations:
            rebuilt = self.reconstruct(tower, values)
            if any(rebuilt[v].is_identity() for v in self.inequations):
                return False
        return True

    def reconstruct(self, tower: Tower, values: Mapping) -> dict:
        """Variable values rebuilt from piece values via the first-type equations."""
        out = {v: values[v] for v in self.kept}
        for var, pieces in self.first_type.items():
            out[var] = tower.mul(*(values[p] for p in pieces))
        return out


class _Collapse:
    """Stack collapse of a concatenated piece sequence, emitting the reduction's equations."""

    def __init__(self, red: RankReduction, tower: Tower, names, int_names, witness: bool):
        self.red = red
        self.tower = tower
        self.names = names
        self.int_names = int_names
        self.witness = witness
        self.s = red.degree
        self.nd = tower.adjunctions[red.rank - 1]

    def power_of_u(self, val) -> Optional[int]:
        return self.tower.power_of_u(self.red.rank, val)

    def new_sym(self, prefix: str, value=None) -> str:
        name = next(self.names[prefix])
        if self.witness:
            self.red.values[name] = value
        self.red.memberships.append((name, self.red_lower_letters))
        return name

    def new_int(self, value=None) -> str:
        name = next(self.int_names)
        if self.witness:
            self.red.values[name] = value
        return name

    def run(self, pieces: list) -> None:
        """pieces: ("H", ref, value) / ("T", expr, value); product must be the identity."""
        stack: list = []
        for p in pieces:
            self.push(stack, p)
        if stack:
            raise ValueError("triangle does not collapse: witness is not a solution")

    def push(self, stack: list, p) -> None:
        red, s = self.red, self.s
        while True:
            kind, ref, val = p
            if kind == "H" and val.is_identity():
                red.residual.append((ref,))
                return
            if kind == "T" and val == 0:
                red.linear.append((dict(ref), 0))
                return
            if not stack:
                stack.append(p)
                return
            top = stack[-1]
            if top[0] == kind:
                stack.pop()
                p = self.merge(top, p)
                if p is None:
                    return
                continue
            if kind == "T" and val % s == 0:
                p = self.t_to_h(p)
                continue
            if kind == "H":
                q = self.power_of_u(val)
                if q is not None:
                    p = self.h_to_t(p, q)
                    continue
            if top[0] == "T" and top[2] % s == 0:
                stack.pop()
                p = self.merge(self.t_to_h(top), p)
                if p is None:
                    return
                continue
            if top[0] == "H":
                q = self.power_of_u(top[2])
                if q is not None:
                    stack.pop()
                    p = self.merge(self.h_to_t(top, q), p)
                    continue
            stack.append(p)
            return

    def merge(self, a, b):
        if a[0] == "T":
            expr = dict(a[1])
            for k, c in b[1].items():
                expr[k] = expr.get(k, 0) + c
            return ("T", {k: c for k, c in expr.items() if c}, a[2] + b[2])
        val = self.tower.mul(a[2], b[2])
        if val.is_identity():
            self.red.residual.append((a[1], b[1]))
            return None
        m = self.new_sym("M", val)
        self.red.residual.append((a[1], b[1], ("sym", m, -1)))
        return ("H", ("sym", m, 1), val)

    def t_to_h(self, p):
        q = self.new_int(p[2] // self.s if self.witness else None)
        expr = dict(p[1])
        expr[q] = expr.get(q, 0) - self.s
        self.red.linear.append(({k: c for k, c in expr.items() if c}, 0))
        val = self.tower.power(self.tower.base_of(self.red.rank), p[2] // self.s)
        z = self.new_sym("Z", val)
        self.red.second_type.append((("sym", z, 1), q))
        return ("H", ("sym", z, 1), val)

    def h_to_t(self, p, q_val: int):
        q = self.new_int(q_val)
        self.red.second_type.append((p[1], q))
        return ("T", {q: self.s}, self.s * q_val)


def _lower_letters(tower: Tower, j: int) -> tuple:
    names = tower.alphabet.names
    return tuple(names[: tower.n_base + j - 1])


def reduce_rank(
    sys: EquationSystem,
    tower: Tower,
    rank: int,
    witness: Mapping[str, TowerWord],
) -> RankReduction:
    """Witness-driven rewriting of a triangular system over ``H_rank`` one rank down.

    Every variable whose witness value involves ``t_rank`` is cut into its normal-form
    syllables (first-type equations); each triangle's syllable sequence is collapsed, which
    emits residual triangles over ``H_{rank-1}``, pinches ``Z = u^q`` (second type), and
    integer relations among t-exponents.  Triangles without ``t_rank`` pass through.
    """
    if not 1 <= rank <= tower.rank:
        raise ValueError(f"rank {rank} out of range 1..{tower.rank}")
    if not is_triangular(sys):
        raise SystemError_("system must be triangular with coefficients in F")
    j = rank
    a = tower.adjunctions[j - 1]
    red = RankReduction(j, a.name, a.degree, tower.format(a.base), inequations=list(sys.inequations))
    lower = _lower_letters(tower, j)
    taken = set(sys.generators) | set(sys.variables) | set(tower.alphabet.names)
    names = {p: _fresh(taken, p) for p in ("Y", "T", "M", "Z")}
    int_names = _fresh(taken, "E")
    col = _Collapse(red, tower, names, int_names, True)
    col.red_lower_letters = lower
    values = {v: tower.normal_form(w) for v, w in witness.items()}
    tl = tower.letter_of(j)
    t_elt = tower.normal_form((tl,))

    pieces_of: dict[str, list] = {}
    for v in sys.variables:
        x = values[v]
        if x.rank < j:
            pieces_of[v] = [("H", ("sym", v, 1), x)]
            red.kept.append(v)
            continue
        if x.rank > j:
            raise ValueError(f"witness for {v} lies above rank {j}")
        seq, syms = [], []
        for kind, val in _syllables(tower, x):
            if kind == "H":
                y = next(names["Y"])
                red.values[y] = val
                red.memberships.append((y, lower))
                seq.append(("H", ("sym", y, 1), val))
                syms.append(y)
            else:
                tname = next(names["T"])
                e = next(int_names)
                red.values[tname] = tower.power(t_elt, val)
                red.values[e] = val
                red.t_powers[tname] = e
                red.commutations.append((tname, a.name))
                seq.append(("T", {e: 1}, val))
                syms.append(tname)
        red.first_type[v] = syms
        pieces_of[v] = seq

    for eq in sys.equations:
        involved = any(values[t.name].rank == j for t in eq if t.name in values)
        if not involved:
            red.passthrough.append(eq)
            continue
        seq = []
        for t in eq:
            n = int(t.exp)
            if t.name in pieces_of:
                base = pieces_of[t.name]
            else:
                letters = (tower.alphabet.letter(t.name),)
                base = [("H", ("const", letters, t.name), tower.normal_form(letters))]
            unit = base if n > 0 else [_inv_piece(tower, p) for p in reversed(base)]
            seq.extend(unit * abs(n))
        col.run(seq)
    red.values.update({v: values[v] for v in sys.variables})
    return red


def _inv_piece(tower: Tower, p):
    kind, ref, val = p
    if kind == "T":
        return ("T", {k: -c for k, c in ref.items()}, -val)
    if ref[0] == "const":
        inv = tuple(-x for x in reversed(ref[1]))
        return ("H", ("const", inv, ref[2] + "^-1"), tower.inverse(val))
    return ("H", ("sym", ref[1], -ref[2]), tower.inverse(val))


def _syllables(tower: Tower, x: TowerWord) -> list:
    """Normal-form syllables of x at its own rank, leading power folded in."""
    from .tower import _pieces, _T

    return [("T" if k == _T else "H", v) for k, v in _pieces(tower.chain, x)]


def reduce_rank_symbolic(
    sys: EquationSystem,
    tower: Tower,
    rank: int,
    max_syllables: int = 1,
    cap: int = 64,
) -> list[RankReduction]:
    """Candidate reductions without a witness: every variable shape with at most
    ``max_syllables`` t-syllables and every pinch pattern of the collapse, up to ``cap``.

    Candidates cover all solutions whose variables have those shapes; conditions of the
    form "does not pinch" are not emitted, so candidates may over-approximate.
    """
    if not 1 <= rank <= tower.rank:
        raise ValueError(f"rank {rank} out of range 1..{tower.rank}")
    if not is_triangular(sys):
        raise SystemError_("system must be triangular with coefficients in F")
    a = tower.adjunctions[rank - 1]
    lower = _lower_letters(tower, rank)
    out: list[RankReduction] = []
    shapes = _shapes(len(sys.variables), max_syllables)
    for shape in shapes:
        for red in _symbolic_candidates(sys, tower, rank, a, lower, dict(zip(sys.variables, shape)), cap - len(out)):
            out.append(red)
            if len(out) >= cap:
                return out
    return out


def _shapes(n: int, k: int) -> list[tuple]:
    if n == 0:
        return [()]
    rest = _shapes(n - 1, k)
    return [(i,) + r for i in range(k + 1) for r in rest]


def _symbolic_candidates(sys, tower, j, a, lower, shape, budget):
    s = a.degree
    base_red = RankReduction(j, a.name, a.degree, tower.format(a.base), inequations=list(sys.inequations))
    taken = set(sys.generators) | set(sys.variables) | set(tower.alphabet.names)
    counters = {p: _fresh(set(taken), p) for p in ("Y", "T", "M", "Z")}
    int_names = _fresh(set(taken), "E")
    pieces_of = {}
    for v in sys.variables:
        n = shape[v]
        if n == 0:
            pieces_of[v] = [("H", ("sym", v, 1), "any")]
            base_red.kept.append(v)
            continue
        seq, syms = [], []
        for i in range(n + 1):
            y = next(counters["Y"])
            base_red.memberships.append((y, lower))
            seq.append(("H", ("sym", y, 1), "end" if i in (0, n) else "inner"))
            syms.append(y)
            if i < n:
                tn, e = next(counters["T"]), next(int_names)
                base_red.t_powers[tn] = e
                base_red.commutations.append((tn, a.name))
                seq.append(("T", {e: 1}, "free"))
                syms.append(tn)
        base_red.first_type[v] = syms
        pieces_of[v] = seq
    seqs = []
    for eq in sys.equations:
        if all(shape.get(t.name, 0) == 0 for t in eq):
            base_red.passthrough.append(eq)
            continue
        seq = []
        for t in eq:
            n = int(t.exp)
            if t.name in pieces_of:
                unit = pieces_of[t.name]
            else:
                letters = (tower.alphabet.letter(t.name),)
                val = tower.normal_form(letters)
                tag = "pinch" if tower.power_of_u(j, val) is not None else "inner"
                unit = [("H", ("const", letters, t.name), tag)]
            if n < 0:
                unit = [
                    ("T", {k: -c for k, c in p[1].items()}, p[2]) if p[0] == "T"
                    else ("H", (p[1][0], p[1][1], -p[1][2]) if p[1][0] == "sym" else ("const", tuple(-x for x in reversed(p[1][1])), p[1][2] + "^-1"), p[2])
                    for p in reversed(unit)
                ]
            seq.extend(unit * abs(n))
        seqs.append(seq)
    reserved = taken | base_red.symbols() | base_red.int_symbols()

    def clone(red: RankReduction) -> RankReduction:
        return RankReduction(
            red.rank, red.letter, red.degree, red.base,
            {k: list(v) for k, v in red.first_type.items()}, list(red.second_type), list(red.residual),
            list(red.linear), list(red.memberships), list(red.commutations), dict(red.t_powers),
            list(red.passthrough), {}, list(red.kept), list(red.inequations),
        )

    def fresh_name(red, ctr, prefix):
        n = ctr.get(prefix, 0)
        while True:
            n += 1
            name = f"{prefix}{n}"
            if name not in reserved:
                ctr[prefix] = n
                return name

    results: list = []

    def walk(qi: int, pi_: int, stack: tuple, red: RankReduction, ctr: dict):
        if len(results) >= budget:
            return
        if qi == len(seqs):
            results.append(red)
            return
        seq = seqs[qi]
        if pi_ == len(seq):
            # the collapsed stack must be trivial
            if not stack:
                walk(qi + 1, 0, (), red, ctr)
            elif len(stack) == 1:
                r2, c2 = clone(red), dict(ctr)
                k, ref, _ = stack[0]
                if k == "H":
                    r2.residual.append((ref,))
                else:
                    r2.linear.append((dict(ref), 0))
                walk(qi + 1, 0, (), r2, c2)
            return
        for st, r2, c2 in _sym_push(stack, seq[pi_], red, ctr, s, lower, clone, fresh_name):
            walk(qi, pi_ + 1, st, r2, c2)

    walk(0, 0, (), base_red, {})
    return results


def _sym_push(stack: tuple, p, red, ctr, s, lower, clone, fresh_name):
    """All outcomes of pushing symbolic piece p as (stack, red, ctr) triples."""
    out = []

    def go(stack, p, red, ctr):
        kind, ref, tag = p
        if not stack:
            out.append(((p,), red, ctr))
            return
        top = stack[-1]
        if top[0] == kind:
            r2, c2 = clone(red), dict(ctr)
            if kind == "T":
                expr = dict(top[1])
                for k, c in ref.items():
                    expr[k] = expr.get(k, 0) + c
                expr = {k: c for k, c in expr.items() if c}
                # sum is zero: the t-power vanishes
                r3, c3 = clone(r2), dict(c2)
                r3.linear.append((dict(expr), 0))
                go_drop(stack[:-1], r3, c3)
                # sum is a nonzero multiple of s: pinch into u^q
                r4, c4 = clone(r2), dict(c2)
                q = fresh_name(r4, c4, "E")
                e2 = dict(expr)
                e2[q] = e2.get(q, 0) - s
                r4.linear.append((e2, 0))
                z = fresh_name(r4, c4, "Z")
                r4.memberships.append((z, lower))
                r4.second_type.append((("sym", z, 1), q))
                go(stack[:-1], ("H", ("sym", z, 1), "pinch"), r4, c4)
                # otherwise a plain t-syllable
                out.append((stack[:-1] + (("T", expr, "free"),), r2, c2))
            else:
                m = fresh_name(r2, c2, "M")
                r2.memberships.append((m, lower))
                r2.residual.append((top[1], ref, ("sym", m, -1)))
                # product trivial
                r3, c3 = clone(red), dict(ctr)
                r3.residual.append((top[1], ref))
                go_drop(stack[:-1], r3, c3)
                # product is a power of u: becomes a t-syllable
                r4, c4 = clone(r2), dict(c2)
                q = fresh_name(r4, c4, "E")
                r4.second_type.append((("sym", m, 1), q))
                go(stack[:-1], ("T", {q: s}, "free"), r4, c4)
                # otherwise a plain H-syllable
                go_h(stack[:-1], ("H", ("sym", m, 1), "inner"), r2, c2)
            return
        if kind == "H" and tag in ("end", "any", "pinch"):
            # H-piece that may itself be a power of u
            r4, c4 = clone(red), dict(ctr)
            q = fresh_name(r4, c4, "E")
            r4.second_type.append((ref, q))
            go(stack, ("T", {q: s}, "free"), r4, c4)
            if tag == "pinch":
                return
        if kind == "T" and top[2] in ("end", "any", "pinch"):
            # the H-piece below may be a power of u and merge with p
            r4, c4 = clone(red), dict(ctr)
            q = fresh_name(r4, c4, "E")
            r4.second_type.append((top[1], q))
            go(stack[:-1] + (("T", {q: s}, "free"),), p, r4, c4)
            if top[2] == "pinch":
                return
        out.append((stack + (p,), red, ctr))

    def go_h(stack, p, red, ctr):
        if stack and stack[-1][0] == "H":
            go(stack, p, red, ctr)
        else:
            out.append((stack + (p,), red, ctr))

    def go_drop(stack, red, ctr):
        out.append((stack, red, ctr))

    go(stack, p, red, ctr)
    return out


# ---------------------------------------------------------------- bounds


def level_bound(M: int) -> int:
    """Roots adjoined per level never exceed three per equation."""
    return 3 * M if M > 0 else 0


def psi_bound(M: int, pi: PiSet, length_cap: int, depth_cap: int) -> int:
    """Explicit bound on total tower rank: (number of rank configurations) + 1.

    A configuration is a triple of
      * a non-free system shape: M triangles, three signed slots each, over at most 3M symbols;
      * a depth vector: at most 3M roots, each of depth in Z_pi ∩ [2, depth_cap] or absent;
      * a free-system shape: at most 3M connector words, each of length <= length_cap.
    """
    if M <= 0:
        return 0
    V = 3 * M
    shapes = (2 * V + 1) ** (3 * M)
    depths = (len(zpi_upto(pi, max(depth_cap, 1), lo=2)) + 1) ** V
    free = (max(length_cap, 0) + 1) ** V
    return shapes * depths * free + 1


@dataclass(frozen=True)
class ShrinkablePiece:
    """Three maximal shrinkable subwords of one piece with lengths named by ``subwords``.

    The piece contributes ``base + s = grown``; ties, zeros and positivity are extra relations.
    """

    subwords: tuple
    base: str
    grown: str
    s: int
    ties: tuple = ()  # pairs of names forced equal
    positive: tuple = ()
    zero: tuple = ()

    def __post_init__(self):
        if len(self.subwords) < 3:
            raise ShapeError("a piece needs three maximal shrinkable subwords")
        if self.s not in (4, 5, 6, 7, 8):
            raise ShapeError(f"shift {self.s} outside 4..8")
        for n in (self.base, self.grown) + tuple(x for p in self.ties for x in p) + self.positive + self.zero:
            if n not in self.subwords:
                raise ShapeError(f"unknown subword {n!r}")


@dataclass
class ShrinkablePieceSystem:
    variables: list
    equations: list  # (expr, rhs)
    positive: list
    zero: list

    def to_linear(self):
        from .fg_solver import LinearDiophantineSystem

        return LinearDiophantineSystem(
            tuple(self.variables), tuple((dict(e), r) for e, r in self.equations),
            positive=tuple(self.positive), zero=tuple(self.zero),
        )

    def to_text(self) -> str:
        lines = ["vars " + " ".join(self.variables)] if self.variables else []
        lines += [_lin_text(e, r) for e, r in self.equations]
        lines += [f"{v} > 0" for v in self.positive]
        lines += [f"{v} = 0" for v in self.zero]
        return "\n".join(lines) + ("\n" if lines else "")

    def length_cap(self, cap: int = 64) -> int:
        """Maximum entry of the least solution; 0 for the empty system."""
        from .fg_solver import solve_lin_dioph

        if not self.variables:
            return 0
        res = solve_lin_dioph(self.to_linear(), cap)
        if res.solution is None:
            raise ValueError(f"length system has no solution within {cap}: {res.status}")
        return max(res.solution.values())


def build_length_system(pieces: Sequence[ShrinkablePiece]) -> ShrinkablePieceSystem:
    """The system of shrinkable-subword lengths: one ``base + s = grown`` per piece plus ties."""
    variables: list[str] = []
    eqs, pos, zero = [], [], []
    for p in pieces:
        for n in p.subwords:
            if n not in variables:
                variables.append(n)
        eqs.append(({p.base: 1, p.grown: -1}, -p.s))
        for a, b in p.ties:
            eqs.append(({a: 1, b: -1}, 0))
        pos.extend(n for n in p.positive if n not in pos)
        zero.extend(n for n in p.zero if n not in zero)
    return ShrinkablePieceSystem(variables, eqs, pos, zero)


@dataclass
class DepthSystem:
    variables: list
    equations: list  # (expr, rhs) with d among the variables
    pi: PiSet
    d: str = "d"
    minimal: bool = False
    designated: tuple = ()

    def to_linear(self):
        from .fg_solver import LinearDiophantineSystem

        return LinearDiophantineSystem(
            tuple(self.variables), tuple((dict(e), r) for e, r in self.equations),
            zpi={self.d: self.pi}, minimality=(self.d, tuple(self.designated)) if self.minimal else None,
        )

    def to_text(self) -> str:
        lines = ["vars " + " ".join(self.variables), f"{self.d} in Z_pi pi={self.pi}"]
        lines += [_lin_text(e, r) for e, r in self.equations]
        if self.minimal:
            lines.append(f"no {self.d} | x for x in {' '.join(self.designated)}")
        return "\n".join(lines) + "\n"


def build_depth_system(
    strips: Sequence[tuple], M: int, pi: PiSet, minimal: bool = False, length_cap: Optional[int] = None
) -> DepthSystem:
    """Homogeneous depth system from middle-strip relations.

    Strip items: ``("pm", i, j, sign, s)`` for ``x_i + sign*x_j = s*d``;
    ``("sum", i, j, k)`` for ``x_i + x_j = x_k``; ``("zero", i)`` for ``x_i = 0``.
    Strip powers above ``length_cap`` (when given) are rejected.
    """
    idx: list[int] = []

    def x(i: int) -> str:
        if i not in idx:
            idx.append(i)
        return f"x{i}"

    eqs = []
    for item in strips:
        if item[0] == "pm":
            _, i, j, sign, s = item
            if length_cap is not None and abs(s) > length_cap:
                raise ShapeError(f"strip power {s} exceeds the length cap {length_cap}")
            e = {x(i): 1}
            e[x(j)] = e.get(x(j), 0) + sign
            e["d"] = e.get("d", 0) - s
            eqs.append(({k: c for k, c in e.items() if c}, 0))
        elif item[0] == "sum":
            _, i, j, k = item
            e: dict = {}
            for n, c in ((x(i), 1), (x(j), 1), (x(k), -1)):
                e[n] = e.get(n, 0) + c
            eqs.append(({k2: c for k2, c in e.items() if c}, 0))
        elif item[0] == "zero":
            eqs.append(({x(item[1]): 1}, 0))
        else:
            raise ShapeError(f"unknown strip relation {item[0]!r}")
    if len(idx) > 3 * max(M, 1):
        raise ShapeError("more than 3M unknowns")
    names = [f"x{i}" for i in sorted(idx)] + ["d"]
    return DepthSystem(names, eqs, pi, "d", minimal, tuple(f"x{i}" for i in sorted(idx)))
