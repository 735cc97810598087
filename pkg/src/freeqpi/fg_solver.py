"""Desk-scale solvers.

* :func:`solve_lin_dioph`: exact solver for small nonnegative linear Diophantine systems
  (row-echelon reduction over Q, then enumeration of the free columns).
* :func:`solve_bounded`: complete-within-bound search for free-group systems with
  membership, commutation and exponent constraints.
* :func:`decide_system`: three-valued decision procedure for systems over F^{Q_pi}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import gcd
from typing import Iterable, Mapping, Optional, Sequence

from . import kernels as K
from .pi_arith import PiSet, in_qpi, zpi_upto

# ---------------------------------------------------------------- linear systems


@dataclass(frozen=True)
class LinearDiophantineSystem:
    """Unknowns range over nonnegative integers.

    ``equations``: pairs (coeffs, rhs) meaning ``sum coeffs[v]*v = rhs``.
    ``zpi``: variable -> PiSet; such a variable lies in Z_pi and is at least 2.
    ``minimality``: (d, xs); solutions with some positive x in xs divisible by d are rejected.
    """

    variables: tuple
    equations: tuple = ()
    zpi: Mapping = field(default_factory=dict)
    positive: tuple = ()
    zero: tuple = ()
    minimality: Optional[tuple] = None

    def __post_init__(self):
        names = set(self.variables)
        if len(names) != len(self.variables):
            raise ValueError("duplicate variable")
        for coeffs, _ in self.equations:
            for v in coeffs:
                if v not in names:
                    raise ValueError(f"undeclared variable {v!r}")
        for v in list(self.zpi) + list(self.positive) + list(self.zero):
            if v not in names:
                raise ValueError(f"undeclared variable {v!r}")
        if self.minimality is not None:
            d, xs = self.minimality
            if d not in names or any(x not in names for x in xs):
                raise ValueError("undeclared variable in minimality condition")

    def admits(self, sol: Mapping[str, int]) -> bool:
        """Whether ``sol`` satisfies every equation and side condition."""
        for v in self.variables:
            x = sol[v]
            if x < 0:
                return False
        for coeffs, rhs in self.equations:
            if sum(c * sol[v] for v, c in coeffs.items()) != rhs:
                return False
        for v, pi in self.zpi.items():
            if sol[v] < 2 or not pi.admits(sol[v]):
                return False
        if any(sol[v] <= 0 for v in self.positive) or any(sol[v] != 0 for v in self.zero):
            return False
        if self.minimality is not None:
            d, xs = self.minimality
            dv = sol[d]
            if dv > 0 and any(sol[x] > 0 and sol[x] % dv == 0 for x in xs):
                return False
        return True


@dataclass(frozen=True)
class LinearResult:
    status: str  # "solved" | "inconsistent" | "exhausted"
    solution: Optional[dict] = None
    free: tuple = ()

    def __bool__(self) -> bool:
        return self.solution is not None


def _rref(rows: list[list[Fraction]], ncols: int) -> tuple[list[list[Fraction]], list[int]]:
    rows = [r[:] for r in rows]
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        k = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if k is None:
            continue
        rows[r], rows[k] = rows[k], rows[r]
        lead = rows[r][c]
        rows[r] = [x / lead for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def solve_lin_dioph(sys: LinearDiophantineSystem, cap: int) -> LinearResult:
    """Lexicographically least solution (in declared variable order) with every entry <= cap.

    Columns are eliminated last-variable-first, so every pivot variable is an affine
    function of earlier free variables; a depth-first walk over the variables in order,
    trying free values upward and computing pivots, meets solutions in lex order.
    """
    if cap < 0:
        raise ValueError("cap must be nonnegative")
    names = list(sys.variables)
    n = len(names)
    col = {v: n - 1 - i for i, v in enumerate(names)}  # reversed column order
    zero = set(sys.zero)
    rows = []
    for coeffs, rhs in sys.equations:
        row = [Fraction(0)] * (n + 1)
        for v, c in coeffs.items():
            row[col[v]] += c
        row[n] = Fraction(rhs)
        rows.append(row)
    for v in sys.zero:
        row = [Fraction(0)] * (n + 1)
        row[col[v]] = Fraction(1)
        rows.append(row)
    red, pivots = _rref(rows, n) if rows else ([], [])
    for row in red[len(pivots):]:
        if row[n] != 0:
            return LinearResult("inconsistent")
    # pivot variable -> (constant, {free var index: coeff})
    formula: dict[int, tuple[Fraction, dict[int, Fraction]]] = {}
    for row, c in zip(red, pivots):
        i = n - 1 - c
        deps = {n - 1 - k: -row[k] for k in range(n) if k != c and row[k] != 0}
        formula[i] = (row[n], deps)
    free = tuple(names[i] for i in range(n) if i not in formula)
    zpi = dict(sys.zpi)
    positive = set(sys.positive)
    ranges = {}
    for i, v in enumerate(names):
        if i in formula:
            continue
        if v in zero:
            ranges[i] = [0]
        elif v in zpi:
            ranges[i] = zpi_upto(zpi[v], cap, lo=2)
        else:
            ranges[i] = list(range(1 if v in positive else 0, cap + 1))

    def ok(i: int, x: int) -> bool:
        v = names[i]
        if x < 0 or x > cap:
            return False
        if v in positive and x <= 0:
            return False
        if v in zpi and (x < 2 or not zpi[v].admits(x)):
            return False
        return True

    vals = [0] * n
    definite = not free

    def walk(i: int) -> bool:
        if i == n:
            sol = dict(zip(names, vals))
            return sys.admits(sol)
        if i in formula:
            const, deps = formula[i]
            x = const + sum(c * vals[j] for j, c in deps.items())
            if x.denominator != 1 or not ok(i, int(x)):
                return False
            vals[i] = int(x)
            return walk(i + 1)
        for x in ranges[i]:
            vals[i] = x
            if walk(i + 1):
                return True
        return False

    if walk(0):
        return LinearResult("solved", dict(zip(names, vals)), free)
    if definite:
        # a unique rational solution that fails integrality, sign or side conditions
        const = {i: f[0] for i, f in formula.items()}
        if any(c.denominator != 1 or c < 0 for c in const.values()):
            return LinearResult("inconsistent", None, free)
        sol = {names[i]: int(c) for i, c in const.items()}
        if not sys.admits(sol):
            return LinearResult("inconsistent", None, free)
    return LinearResult("exhausted", None, free)


# ---------------------------------------------------------------- Smith normal form


def smith_normal_form(A: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """(U, D, V) with U*A*V = D diagonal, U and V unimodular, d_i | d_{i+1}."""
    m = len(A)
    n = len(A[0]) if m else 0
    D = [list(map(int, r)) for r in A]
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(M, i, j):
        M[i], M[j] = M[j], M[i]

    def swap_cols(M, i, j):
        for r in M:
            r[i], r[j] = r[j], r[i]

    def add_row(M, src, dst, f):  # row dst += f * row src
        M[dst] = [a + f * b for a, b in zip(M[dst], M[src])]

    def add_col(M, src, dst, f):
        for r in M:
            r[dst] += f * r[src]

    for k in range(min(m, n)):
        while True:
            nz = [(abs(D[i][j]), i, j) for i in range(k, m) for j in range(k, n) if D[i][j]]
            if not nz:
                return U, D, V
            _, i, j = min(nz)
            swap_rows(D, k, i), swap_rows(U, k, i)
            swap_cols(D, k, j), swap_cols(V, k, j)
            p = D[k][k]
            done = True
            for i in range(k + 1, m):
                q = D[i][k] // p
                if q:
                    add_row(D, k, i, -q), add_row(U, k, i, -q)
                if D[i][k]:
                    done = False
            for j in range(k + 1, n):
                q = D[k][j] // p
                if q:
                    add_col(D, k, j, -q), add_col(V, k, j, -q)
                if D[k][j]:
                    done = False
            if not done:
                continue
            bad = next(((i, j) for i in range(k + 1, m) for j in range(k + 1, n) if D[i][j] % p), None)
            if bad is None:
                break
            add_row(D, bad[0], k, 1), add_row(U, bad[0], k, 1)
        if D[k][k] < 0:
            D[k] = [-x for x in D[k]]
            U[k] = [-x for x in U[k]]
    return U, D, V


def solvable_over_qpi(A: Sequence[Sequence[int]], b: Sequence[Fraction], pi: PiSet) -> bool:
    """Whether ``A x = b`` has a solution with entries in Q_pi (b itself in Q_pi)."""
    m = len(A)
    if m == 0:
        return True
    n = len(A[0])
    if n == 0:
        return all(Fraction(x) == 0 for x in b)
    U, D, _ = smith_normal_form(A)
    c = [sum(Fraction(U[i][k]) * Fraction(b[k]) for k in range(m)) for i in range(m)]
    for i in range(m):
        d = D[i][i] if i < n else 0
        if d == 0:
            if c[i] != 0:
                return False
        elif not in_qpi(c[i] / d, pi):
            return False
    return True


# ---------------------------------------------------------------- constrained free systems


class CoverageError(KeyError):
    """An assignment misses a variable of the system."""


class BudgetExceeded(RuntimeError):
    def __init__(self, budget: str, limit: int):
        super().__init__(f"{budget} budget of {limit} exhausted")
        self.budget = budget
        self.limit = limit


@dataclass(frozen=True)
class ConstrainedFreeSystem:
    """Equations over the free group on ``alphabet``.

    Equation atoms: ``("var", name, exp)``, ``("word", letters)`` with letters as ints over
    the alphabet, ``("pow", letter_name, int_var, sign)`` for ``letter^(sign*E)``.
    """

    alphabet: tuple
    variables: tuple
    equations: tuple = ()
    int_variables: tuple = ()
    memberships: tuple = ()  # (var, letter names)
    commutations: tuple = ()  # (var, letter name)
    linear: tuple = ()  # (coeffs, rhs) over int variables
    inequations: tuple = ()

    def __post_init__(self):
        letters = set(self.alphabet)
        words = set(self.variables)
        ints = set(self.int_variables)
        for eq in self.equations:
            for atom in eq:
                if atom[0] == "var" and atom[1] not in words:
                    raise ValueError(f"undeclared variable {atom[1]!r}")
                if atom[0] == "pow" and (atom[1] not in letters or atom[2] not in ints):
                    raise ValueError(f"bad power atom {atom!r}")
                if atom[0] == "word" and any(x == 0 or abs(x) > len(self.alphabet) for x in atom[1]):
                    raise ValueError(f"letter out of range in {atom!r}")
        for v, subset in self.memberships:
            if v not in words or not set(subset) <= letters:
                raise ValueError(f"bad membership constraint for {v!r}")
        for v, t in self.commutations:
            if v not in words or t not in letters:
                raise ValueError(f"bad commutation constraint for {v!r}")
        for coeffs, _ in self.linear:
            if not set(coeffs) <= ints:
                raise ValueError("linear constraint on undeclared integer variable")
        for v in self.inequations:
            if v not in words:
                raise ValueError(f"inequation on undeclared variable {v!r}")

    def letter(self, name: str) -> int:
        return self.alphabet.index(name) + 1

    def format_word(self, w: Sequence[int]) -> str:
        from .free_core import Alphabet

        return Alphabet(self.alphabet).format(w)


@dataclass(frozen=True)
class Assignment:
    words: Mapping
    ints: Mapping = field(default_factory=dict)

    def key(self, sys: ConstrainedFreeSystem) -> tuple:
        """Canonical order: total length, then per-variable shortlex, then integers."""
        ws = [tuple(self.words[v]) for v in sys.variables]
        return (
            sum(len(w) for w in ws),
            tuple(K.shortlex_key(w) for w in ws),
            tuple((abs(self.ints[e]), -self.ints[e]) for e in sys.int_variables),
        )


def _atom_value(sys: ConstrainedFreeSystem, atom, words: Mapping, ints: Mapping) -> tuple:
    kind = atom[0]
    if kind == "var":
        return K.power(tuple(words[atom[1]]), atom[2])
    if kind == "word":
        return K.free_reduce(tuple(atom[1]))
    return K.power((sys.letter(atom[1]),), atom[3] * ints[atom[2]])


def _eval_equation(sys, eq, words, ints) -> tuple:
    acc: tuple = ()
    for atom in eq:
        acc = K.mul(acc, _atom_value(sys, atom, words, ints))
    return acc


def verify_assignment(sys: ConstrainedFreeSystem, asg: Assignment) -> bool:
    for v in sys.variables:
        if v not in asg.words:
            raise CoverageError(v)
    for e in sys.int_variables:
        if e not in asg.ints:
            raise CoverageError(e)
    words = {v: K.free_reduce(tuple(w)) for v, w in asg.words.items()}
    ints = asg.ints
    for eq in sys.equations:
        if _eval_equation(sys, eq, words, ints):
            return False
    for v, subset in sys.memberships:
        allowed = {sys.letter(n) for n in subset}
        if any(abs(x) not in allowed for x in words[v]):
            return False
    for v, t in sys.commutations:
        tl = (sys.letter(t),)
        if K.mul(words[v], tl) != K.mul(tl, words[v]):
            return False
    for coeffs, rhs in sys.linear:
        if sum(c * ints[e] for e, c in coeffs.items()) != rhs:
            return False
    return all(words[v] for v in sys.inequations)


def _words_over(letters: Sequence[int], max_len: int):
    """Reduced words over the given letters (and inverses), shortlex order."""
    alpha = sorted(set(letters) | {-x for x in letters}, key=K.letter_key)

    def extend(prefix, left):
        if left == 0:
            yield prefix
            return
        for x in alpha:
            if prefix and prefix[-1] == -x:
                continue
            yield from extend(prefix + (x,), left - 1)

    for n in range(max_len + 1):
        yield from extend((), n)


def _candidates(sys: ConstrainedFreeSystem, v: str, max_len: int) -> list:
    subset = None
    for w, names in sys.memberships:
        if w == v:
            s = {sys.letter(n) for n in names}
            subset = s if subset is None else subset & s
    comm = {sys.letter(t) for w, t in sys.commutations if w == v}
    if comm:
        # the centralizer of a letter in a free group is the cyclic group it generates
        if len(comm) > 1:
            return [()]
        (t,) = comm
        if subset is not None and t not in subset:
            return [()]
        out = [()]
        for k in range(1, max_len + 1):
            out += [(t,) * k, (-t,) * k]
        return out
    letters = sorted(subset) if subset is not None else list(range(1, len(sys.alphabet) + 1))
    return list(_words_over(letters, max_len))


def _int_assignments(sys: ConstrainedFreeSystem, bound: int):
    names = list(sys.int_variables)
    rng = sorted(range(-bound, bound + 1), key=lambda x: (abs(x), -x))
    for combo in product(rng, repeat=len(names)):
        vals = dict(zip(names, combo))
        if all(sum(c * vals[e] for e, c in co.items()) == rhs for co, rhs in sys.linear):
            yield vals


def solve_bounded(
    sys: ConstrainedFreeSystem,
    max_len: int,
    int_bound: Optional[int] = None,
    max_candidates: Optional[int] = None,
) -> Optional[Assignment]:
    """Least assignment (see :meth:`Assignment.key`) with every word of length <= max_len.

    Integer variables range over ``[-int_bound, int_bound]`` (default ``max_len``).
    A variable occurring once with exponent +-1 in an equation whose other atoms are known
    is solved for instead of enumerated.  Raises :class:`BudgetExceeded` past
    ``max_candidates`` complete assignments.
    """
    if max_len < 0:
        raise ValueError("max_len must be nonnegative")
    bound = max_len if int_bound is None else int_bound
    cands = {v: _candidates(sys, v, max_len) for v in sys.variables}
    best: list = [None, None]
    tried = [0]

    def occurrences(eq, words):
        return [a for a in eq if a[0] == "var" and a[1] not in words]

    def propagate(words: dict, ints) -> Optional[dict]:
        words = dict(words)
        changed = True
        while changed:
            changed = False
            for eq in sys.equations:
                occ = occurrences(eq, words)
                if not occ:
                    if _eval_equation(sys, eq, words, ints):
                        return None
                    continue
                if len(occ) != 1 or abs(occ[0][2]) != 1:
                    continue
                i = eq.index(occ[0])
                pre = _eval_equation(sys, eq[:i], words, ints)
                suf = _eval_equation(sys, eq[i + 1:], words, ints)
                val = K.inverse(K.mul(suf, pre))
                if occ[0][2] < 0:
                    val = K.inverse(val)
                if len(val) > max_len:
                    return None
                words[occ[0][1]] = val
                changed = True
        return words

    def walk(words: dict, ints) -> None:
        words = propagate(words, ints)
        if words is None:
            return
        todo = [v for v in sys.variables if v not in words]
        if not todo:
            tried[0] += 1
            if max_candidates is not None and tried[0] > max_candidates:
                raise BudgetExceeded("max_candidates", max_candidates)
            asg = Assignment(dict(words), dict(ints))
            if verify_assignment(sys, asg):
                k = asg.key(sys)
                if best[0] is None or k < best[0]:
                    best[0], best[1] = k, asg
            return
        v = todo[0]
        for w in cands[v]:
            words[v] = w
            walk(words, ints)
        del words[v]

    for ints in _int_assignments(sys, bound):
        walk({}, ints)
    return best[1]


# ---------------------------------------------------------------- deciding systems over F^{Q_pi}

SOLVABLE = "solvable"
UNSOLVABLE = "unsolvable"
UNKNOWN = "unknown"


@dataclass
class Verdict:
    status: str
    witness: Optional[dict] = None  # variable -> QElement
    group: object = None
    reason: str = ""
    budget: Optional[str] = None  # binding budget for UNKNOWN

    def report(self) -> list[str]:
        lines = [f"RESULT {self.status}"]
        if self.status == SOLVABLE:
            for v in sorted(self.witness):
                lines.append(f"WITNESS {v} = {self.witness[v].format()}")
            lines += ["ROOT " + line[len("root "):] for line in self.group.tower.describe()]
        elif self.reason:
            lines.append(f"REASON {self.reason}")
        return lines


class _Refuted(Exception):
    pass


def _subst(eq, known: Mapping) -> tuple:
    """Split an equation into runs: ("const", QElement-list) and ("var", name, exp)."""
    out = []
    for t in eq:
        if t.name in known:
            out.append(("k", t.name, t.exp))
        else:
            out.append(("v", t.name, t.exp))
    return tuple(out)


def _power(group, x, e: Fraction):
    return x ** int(e) if e.denominator == 1 else group.qexp(x, e)


def _product(group, vals: Mapping, atoms) -> object:
    acc = group.identity()
    for _, name, e in atoms:
        acc = acc * _power(group, group.lift(vals[name]), e)
    return acc


def _solve_power(group, alpha: Fraction, c):
    """The unique x with ``x^alpha = c``, or raise _Refuted; None when not exact."""
    from .tower import ConjugacyBudgetExceeded

    from .qgroup import QElement

    p, q = alpha.numerator, alpha.denominator
    if q != 1:
        c = _power(group, c, Fraction(q))  # x^p = c^q
    if p == 0:
        if not c.is_identity():
            raise _Refuted("an equation forces a nontrivial element to be trivial")
        return None
    if c.is_identity():
        return group.identity()
    tw = c.tower
    try:
        h, r, m = tw.root(c.word)
    except ConjugacyBudgetExceeded:
        return None
    e = Fraction(m, p)
    if not in_qpi(e, group.pi):
        raise _Refuted(f"no root of degree {abs(p)}: exponent {e} is not in Q_pi")
    H = QElement(group, tw, h)
    R = QElement(group, tw, r)
    return H * _power(group, R, e) * H.inverse()


def _propagate(sys, group, vals: dict) -> dict:
    """Fill in every variable forced by an equation of the form ``P x^alpha S = 1``.

    Roots are unique in F^{Q_pi}, so forced values are exact and contradictions refute.
    """
    vals = dict(vals)
    changed = True
    while changed:
        changed = False
        for eq in sys.equations:
            unknown = [t for t in eq if t.name not in vals]
            names = {t.name for t in unknown}
            if not unknown:
                if not _product(group, vals, _subst(eq, vals)).is_identity():
                    raise _Refuted("an equation fails on forced values")
                continue
            if len(unknown) != 1:
                continue
            t = unknown[0]
            i = eq.index(t)
            pre = _product(group, vals, _subst(eq[:i], vals))
            suf = _product(group, vals, _subst(eq[i + 1:], vals))
            c = pre.inverse() * suf.inverse()
            x = _solve_power(group, t.exp, c)
            if x is None:
                continue
            vals[t.name] = x
            changed = True
    for v in sys.inequations:
        if v in vals and group.lift(vals[v]).is_identity():
            raise _Refuted(f"{v} is forced to be trivial")
    return vals


def _conjugacy_hints(sys, group, vals: dict) -> dict:
    """Check equations ``x^e C x^-e D = 1`` (after rotation) by conjugacy; return a conjugator per x."""
    from .tower import ConjugacyBudgetExceeded

    from .qgroup import QElement

    hints = {}
    for eq in sys.equations:
        unknown = [k for k, t in enumerate(eq) if t.name not in vals]
        if len(unknown) != 2:
            continue
        i, j = unknown
        a, b = eq[i], eq[j]
        if a.name != b.name or a.exp not in (1, -1) or b.exp != -a.exp:
            continue
        rot = eq[i:] + eq[:i]
        j2 = j - i
        C = _product(group, vals, _subst(rot[1:j2], vals))
        D = _product(group, vals, _subst(rot[j2 + 1:], vals))
        tw = group.tower
        C, Dinv = group.lift(C), group.lift(D).inverse()
        try:
            c = tw.is_conjugate(C.word, Dinv.word)
        except ConjugacyBudgetExceeded:
            continue
        if c is None:
            raise _Refuted(f"{format(C)} and {format(Dinv)} are not conjugate")
        # c^-1 C c = D^-1
        g = QElement(group, tw, c)
        hints.setdefault(a.name, g.inverse() if a.exp == 1 else g)
    return hints


def _abelian_obstruction(sys, group, vals: dict) -> None:
    """Refute when the abelianized system has no solution over Q_pi."""
    unknown = sorted({t.name for eq in sys.equations for t in eq if t.name not in vals})
    if not unknown:
        return
    n = group.tower.n_base
    rows, rhs = [], []
    for eq in sys.equations:
        coeffs = {v: Fraction(0) for v in unknown}
        const = [Fraction(0)] * n
        for t in eq:
            if t.name in coeffs:
                coeffs[t.name] += t.exp
            else:
                x = group.lift(vals[t.name])
                ab = x.tower.abelianize(x.word)
                for k in range(n):
                    const[k] += t.exp * ab[k]
        den = 1
        for c in coeffs.values():
            den = den * c.denominator // gcd(den, c.denominator)
        rows.append([int(coeffs[v] * den) for v in unknown])
        rhs.append([-den * c for c in const])
    for k in range(n):
        if not solvable_over_qpi(rows, [r[k] for r in rhs], group.pi):
            raise _Refuted("the abelianized system has no solution over Q_pi")


def _candidate_bases(sys, group, vals: dict) -> list:
    """Primitive roots of generators and constant runs, deduplicated, in a fixed order."""
    from .tower import ConjugacyBudgetExceeded, NotPrimitiveError

    out, seen = [], set()

    def add(x):
        x = group.lift(x)
        if x.is_identity():
            return
        tw = x.tower
        try:
            _, r, _ = tw.root(x.word)
        except (ConjugacyBudgetExceeded, NotPrimitiveError):
            return
        if r not in seen:
            seen.add(r)
            out.append(r)

    for g in sys.generators:
        add(group.gen(g))
    for eq in sys.equations:
        run = []
        for t in eq + (None,):
            if t is not None and t.name in vals:
                run.append(("k", t.name, t.exp))
            elif run:
                add(_product(group, vals, run))
                run = []
    return out


def _candidate_towers(base, bases: list, pi: PiSet, max_rank: int, max_depth: int) -> list:
    from .tower import TowerError

    degrees = zpi_upto(pi, max_depth, lo=2)
    towers = [base]
    frontier = [base]
    while frontier:
        nxt = []
        for tw in frontier:
            if tw.rank >= max_rank:
                continue
            for u in bases:
                for s in degrees:
                    try:
                        nxt.append(tw.adjoin_root(u, s))
                    except (TowerError, ValueError):
                        continue
        towers += nxt
        frontier = nxt
    return towers


def _clean_witness(sys, group, witness: dict):
    """Rebuild the witness over a tower holding only the roots it uses, renamed t1, t2, ...

    Returns (group, witness) verified on the original system, or None.
    """
    from .eq_pipeline import check_solution
    from .qgroup import QElement, QGroup
    from .tower import Tower

    tw = max((group.lift(x).tower for x in witness.values()), key=lambda t: t.rank, default=group.tower)
    spell = {v: tw.beta(group.lift(x).word) for v, x in witness.items()}
    nb = tw.n_base
    used = {abs(y) - nb for w in spell.values() for y in w if abs(y) > nb}
    for j in range(tw.rank, 0, -1):
        if j in used:
            used |= {abs(y) - nb for y in tw.spell(tw.base_of(j)) if abs(y) > nb}
    order = sorted(used)
    rename = {nb + j: nb + k + 1 for k, j in enumerate(order)}

    def tr(w):
        return tuple((rename[abs(y)] if abs(y) > nb else abs(y)) * (1 if y > 0 else -1) for y in w)

    try:
        new = Tower(list(sys.generators), sys.pi)
        for j in order:
            a = tw.adjunctions[j - 1]
            new = new.adjoin_root(new.normal_form(tr(tw.spell(a.base))), a.degree)
        G = QGroup(sys.generators, sys.pi).fork(new)
        wit = {v: QElement(G, new, new.normal_form(tr(w))) for v, w in spell.items()}
        if check_solution(sys, G, wit):
            return G, wit
    except Exception:  # noqa: BLE001 - any failure falls back to the unrenamed witness
        pass
    return None


def _finish(sys, group, witness: dict) -> Verdict:
    from .eq_pipeline import check_solution

    cleaned = _clean_witness(sys, group, witness)
    if cleaned is not None:
        G, wit = cleaned
        return Verdict(SOLVABLE, wit, G)
    wit = {v: group.lift(x) for v, x in witness.items()}
    if check_solution(sys, group, wit):
        return Verdict(SOLVABLE, wit, group)
    return None


def _witness_key(witness: dict, tower) -> tuple:
    from .eq_pipeline import SolutionVector

    sv = SolutionVector.of(witness, tower)
    names = sorted(witness)
    return (sum(sv.tau), sv.tau, tuple(K.shortlex_key(tower.beta(witness[v].word)) for v in names))


def decide_system(
    sys,
    pi: Optional[PiSet] = None,
    max_len: int = 8,
    max_rank: int = 2,
    max_depth: int = 6,
    lin_cap: int = 20,
    max_candidates: int = 20000,
) -> Verdict:
    """Three-valued decision for a finite system over F^{Q_pi}.

    Exact steps (their verdicts hold with no budget): forced values from single-occurrence
    equations ``x^alpha = c`` (root extraction and the Q_pi criterion), conjugacy of
    ``x C x^-1 = D`` and the abelianized system over Q_pi.  Otherwise a bounded search over
    candidate towers of rank <= max_rank and words of length <= max_len; it can only answer
    SOLVABLE or UNKNOWN.
    """
    from .eq_pipeline import SystemError_, coefficient_values, level_bound, psi_bound
    from .qgroup import QGroup

    if min(max_len, max_rank, max_depth, lin_cap, max_candidates) < 0:
        raise ValueError("budgets must be nonnegative")
    if pi is not None and pi != sys.pi:
        from dataclasses import replace

        sys = replace(sys, pi=pi)
    group = QGroup(sys.generators, sys.pi)
    try:
        vals = coefficient_values(sys, group)
    except ValueError as exc:
        raise SystemError_(str(exc)) from exc
    try:
        vals = _propagate(sys, group, vals)
        hints = _conjugacy_hints(sys, group, vals)
        _abelian_obstruction(sys, group, vals)
    except _Refuted as exc:
        return Verdict(UNSOLVABLE, reason=str(exc))
    if all(v in vals for v in sys.variables):
        res = _finish(sys, group, {v: vals[v] for v in sys.variables})
        if res is not None:
            return res
        return Verdict(UNSOLVABLE, reason="forced values fail an inequation")

    bases = _candidate_bases(sys, group, vals)
    towers = _candidate_towers(group.tower, bases, sys.pi, max_rank, max_depth)
    groups = [group.fork(tw) for tw in towers]
    words = [_LazyWords(tw) for tw in towers]
    spent = [0]
    hit_budget = False
    # iterative deepening on word length, every candidate tower at each length
    for L in range(max_len + 1):
        for G, ws in zip(groups, words):
            found: list = []
            try:
                _search(sys, G, vals, hints, ws, L, spent, max_candidates, found)
            except BudgetExceeded:
                hit_budget = True
            if found:
                key = lambda w: _witness_key(w, max((x.tower for x in w.values()), key=lambda t: t.rank))
                for best in sorted(found, key=key):
                    res = _finish(sys, G, best)
                    if res is not None:
                        return res
            if hit_budget:
                return Verdict(
                    UNKNOWN, reason=f"candidate budget {max_candidates} exhausted", budget="max_candidates"
                )
    M = len(sys.equations)
    bound = psi_bound(M, sys.pi, lin_cap, max_depth)
    return Verdict(
        UNKNOWN,
        reason=f"no solution with words <= {max_len} over towers of rank <= {max_rank}; "
        f"completeness needs rank up to {bound} (level bound {level_bound(M)})",
        budget="max_len" if bound <= max_rank else "max_rank",
    )


class _LazyWords:
    """Distinct tower elements by shortlex spelling, generated on demand and cached."""

    def __init__(self, tower):
        self.tower = tower
        self.items: list = []  # (length, element)
        self._gen = self._make()
        self._done = False

    def _make(self):
        seen = set()
        for w in _words_over(range(1, len(self.tower.alphabet) + 1), 1 << 30):
            x = self.tower.normal_form(w)
            if x not in seen:
                seen.add(x)
                yield len(w), x

    def upto(self, L: int):
        i = 0
        while True:
            while i >= len(self.items):
                if self.items and self.items[-1][0] > L:
                    return
                self.items.append(next(self._gen))
            n, x = self.items[i]
            if n > L:
                return
            yield n, x
            i += 1


_MAX_FOUND = 32


def _search(sys, G, vals: dict, hints: dict, words: "_LazyWords", L: int, spent: list, max_candidates: int, found: list) -> None:
    """Depth-first assignment with propagation in group G; solutions go to ``found``.

    Only assignments with some word of length exactly L are new at this depth.
    """
    from .qgroup import QElement

    tw = G.tower

    def walk(known: dict, fresh: bool) -> None:
        if len(found) >= _MAX_FOUND:
            return
        try:
            known = _propagate(sys, G, known)
        except _Refuted:
            return
        todo = [v for v in sys.variables if v not in known]
        if not todo:
            if fresh or L == 0:
                found.append({v: G.lift(known[v]) for v in sys.variables})
            return
        v = todo[0]
        cands = []
        if v in hints:
            cands.append((L, G.lift(hints[v])))
        for n, x in words.upto(L):
            cands.append((n, QElement(G, tw, x)))
        for n, x in cands:
            spent[0] += 1
            if spent[0] > max_candidates:
                raise BudgetExceeded("max_candidates", max_candidates)
            if v in sys.inequations and x.is_identity():
                continue
            walk({**known, v: x}, fresh or n == L)

    walk(dict(vals), False)
