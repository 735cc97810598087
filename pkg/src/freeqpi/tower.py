"""Towers of root adjunctions ``H_j = H_{j-1} *_{u_j = t_j^{s_j}} <t_j>`` over a free group.

Every element is stored in a canonical normal form (:class:`TowerWord`) at the
lowest rank containing it: a leading power ``u_r^k`` followed by an alternating
sequence of right ``<u_r>``-coset representatives of ``H_{r-1}`` and
``t_r``-exponents in ``1..s_r-1``.  Equality is identity of normal forms.

Letters: base generator ``i`` is ``i`` (1-based), the adjoined root ``t_j`` is
``N + j``; inverses are negated.
"""

from __future__ import annotations

from collections import Counter
from fractions import Fraction
from math import gcd
from typing import Iterable, Optional, Sequence, Union

from . import kernels as K
from .free_core import Alphabet, AlphabetError, cyclic_core, enumerate_reduced, primitive_period
from .pi_arith import PiSet, PiViolation, zpi_nth
from .syntax import parse_word, to_letters

_T = 0  # piece kind: power of the top root letter
_H = 1  # piece kind: element of the previous rank


class TowerError(ValueError):
    pass


class NotPrimitiveError(TowerError):
    pass


class ConjugacyBudgetExceeded(TowerError):
    """A bounded coset or conjugacy search did not settle within its budget."""


class TowerWord:
    """Normal form of an element; rank 0 words keep the reduced free word in ``syl``."""

    __slots__ = ("rank", "lead", "syl", "_hash")

    def __init__(self, rank: int, lead: int, syl: tuple):
        self.rank = rank
        self.lead = lead
        self.syl = syl
        self._hash = hash((rank, lead, syl))

    @classmethod
    def free(cls, letters: tuple[int, ...]) -> "TowerWord":
        return cls(0, 0, letters)

    def is_identity(self) -> bool:
        return self.rank == 0 and not self.syl

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, TowerWord)
            and self._hash == other._hash
            and self.rank == other.rank
            and self.lead == other.lead
            and self.syl == other.syl
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        if self.rank == 0:
            return f"TowerWord(0, {list(self.syl)})"
        return f"TowerWord({self.rank}, u^{self.lead}, {list(self.syl)})"


IDENTITY = TowerWord.free(())


class RootAdjunction:
    """One step ``u_j = t_j^{s_j}``; nodes are shared by every tower extending them."""

    def __init__(self, parent: Optional["RootAdjunction"], n_base: int, base: TowerWord, degree: int, name: str):
        self.parent = parent
        self.index = 1 if parent is None else parent.index + 1
        self.chain: tuple[RootAdjunction, ...] = (parent.chain if parent else ()) + (self,)
        self.n_base = n_base
        self.base = base
        self.degree = degree
        self.name = name
        self.letter = n_base + self.index
        self.level = base.rank
        self._nf: dict = {}
        self._canon = None
        self.cyc = _Cyclic(self.chain, base, n_base)
        self.ab_t: tuple[Fraction, ...] = tuple(c / degree for c in _ab(self.chain, base, n_base))

    def __repr__(self) -> str:
        return f"RootAdjunction({self.name}^{self.degree} = u_{self.index})"


# ---------------------------------------------------------------- kernels


def _node(chain: Sequence[RootAdjunction], rank: int) -> RootAdjunction:
    return chain[rank - 1]


def _spell(chain, x: TowerWord) -> tuple[int, ...]:
    """Structural spelling of a normal form as a reduced word over d's and t's."""
    if x.rank == 0:
        return x.syl
    nd = chain[x.rank - 1]
    hit = nd._nf.get(("spell", x))
    if hit is not None:
        return hit
    s, t = nd.degree, nd.letter
    out: list[int] = []
    first, rest = x.syl[0], x.syl[1:]
    if isinstance(first, int):
        e = s * x.lead + first
        out.extend((t if e > 0 else -t,) * abs(e))
    else:
        g = first if x.lead == 0 else _mul(chain, _base_pow(nd, x.lead), first)
        out.extend(_spell(chain, g))
    for item in rest:
        if isinstance(item, int):
            out.extend((t,) * item)
        else:
            out.extend(_spell(chain, item))
    res = tuple(out)
    nd._nf[("spell", x)] = res
    return res


def _key(chain, x: TowerWord):
    return K.shortlex_key(_spell(chain, x))


def _ab(chain, x: TowerWord, n_base: int) -> list[Fraction]:
    cache = chain[x.rank - 1]._nf if x.rank else None
    if cache is not None:
        hit = cache.get(("ab", x))
        if hit is not None:
            return list(hit)
    counts = Counter(_spell(chain, x))
    vec = [Fraction(0)] * n_base
    for y, n in counts.items():
        a = abs(y)
        m = n if y > 0 else -n
        if a <= n_base:
            vec[a - 1] += m
        else:
            for i, c in enumerate(chain[a - n_base - 1].ab_t):
                vec[i] += m * c
    if cache is not None:
        cache[("ab", x)] = tuple(vec)
    return vec


def _nf(chain, rank: int, raw: Sequence[int]) -> TowerWord:
    """Normal form of a raw letter sequence over letters of rank <= ``rank``."""
    raw = tuple(raw)
    if rank == 0:
        return TowerWord.free(K.free_reduce(raw))
    nd = chain[rank - 1]
    hit = nd._nf.get(raw)
    if hit is not None:
        return hit
    t = nd.letter
    if t not in raw and -t not in raw:
        res = _nf(chain, rank - 1, raw)
        nd._nf[raw] = res
        return res
    stack: list = []
    block: list[int] = []
    e = 0
    for y in raw:
        if y == t or y == -t:
            if block:
                _push(chain, nd, stack, _H, _nf(chain, rank - 1, block))
                block = []
            e += 1 if y > 0 else -1
        else:
            if e:
                _push(chain, nd, stack, _T, e)
                e = 0
            block.append(y)
    if block:
        _push(chain, nd, stack, _H, _nf(chain, rank - 1, block))
    if e:
        _push(chain, nd, stack, _T, e)
    res = _finish(chain, nd, stack)
    nd._nf[raw] = res
    return res


def _push(chain, nd: RootAdjunction, stack: list, kind: int, val) -> None:
    s = nd.degree
    while True:
        if (kind == _T and val == 0) or (kind == _H and val.is_identity()):
            return
        if not stack:
            stack.append((kind, val))
            return
        tk, tv = stack[-1]
        if tk == kind:
            stack.pop()
            val = tv + val if kind == _T else _mul(chain, tv, val)
            continue
        if kind == _T and val % s == 0:
            kind, val = _H, _base_pow(nd, val // s)
            continue
        if kind == _H:
            q = _power_of_u(nd, val)
            if q is not None:
                kind, val = _T, s * q
                continue
        if tk == _T and tv % s == 0:
            stack.pop()
            kind, val = _H, _mul(chain, _base_pow(nd, tv // s), val)
            continue
        if tk == _H:
            q = _power_of_u(nd, tv)
            if q is not None:
                stack.pop()
                kind, val = _T, s * q + val
                continue
        stack.append((kind, val))
        return


def _finish(chain, nd: RootAdjunction, stack: list) -> TowerWord:
    if not stack:
        return IDENTITY
    s = nd.degree
    if len(stack) == 1:
        kind, val = stack[0]
        if kind == _H:
            return val
        if val % s == 0:
            return _base_pow(nd, val // s)
    carry = 0
    out = []
    for kind, val in reversed(stack):
        if kind == _T:
            q, r = divmod(val + s * carry, s)
            out.append(r)
            carry = q
        else:
            g = val if carry == 0 else _mul(chain, val, _base_pow(nd, carry))
            carry, rep = _coset_rep(chain, nd, g)
            out.append(rep)
    out.reverse()
    return TowerWord(nd.index, carry, tuple(out))


def _pieces_at(chain, rank: int, x: TowerWord) -> list:
    if x.is_identity():
        return []
    if x.rank < rank:
        return [(_H, x)]
    return _pieces(chain, x)


def _mul(chain, x: TowerWord, y: TowerWord) -> TowerWord:
    if x.is_identity():
        return y
    if y.is_identity():
        return x
    if x.rank == 0 and y.rank == 0:
        return TowerWord.free(K.mul(x.syl, y.syl))
    r = max(x.rank, y.rank)
    nd = chain[r - 1]
    stack: list = []
    for kind, val in _pieces_at(chain, r, x) + _pieces_at(chain, r, y):
        _push(chain, nd, stack, kind, val)
    return _finish(chain, nd, stack)


def _inv(chain, x: TowerWord) -> TowerWord:
    if x.rank == 0:
        return TowerWord.free(K.inverse(x.syl))
    nd = chain[x.rank - 1]
    hit = nd._nf.get(("inv", x))
    if hit is not None:
        return hit
    stack: list = []
    for kind, val in reversed(_pieces(chain, x)):
        _push(chain, nd, stack, kind, -val if kind == _T else _inv(chain, val))
    res = _finish(chain, nd, stack)
    nd._nf[("inv", x)] = res
    return res


def _pow(chain, x: TowerWord, n: int) -> TowerWord:
    if x.rank == 0:
        return TowerWord.free(K.power(x.syl, n))
    if n < 0:
        x, n = _inv(chain, x), -n
    acc, sq = IDENTITY, x
    while n:
        if n & 1:
            acc = _mul(chain, acc, sq)
        n >>= 1
        if n:
            sq = _mul(chain, sq, sq)
    return acc


def _base_pow(nd: RootAdjunction, q: int) -> TowerWord:
    return nd.cyc.pow(q)


def _power_of_u(nd: RootAdjunction, x: TowerWord) -> Optional[int]:
    """k with ``x = u^k`` for the base u of ``nd``, or None."""
    return nd.cyc.power_of(x)


def _coset_rep(chain, nd: RootAdjunction, g: TowerWord) -> tuple[int, TowerWord]:
    """(q, rep) with ``g = u^q rep`` and rep the shortlex-least spelling in ``<u> g``."""
    return nd.cyc.coset(g)


def _double_coset(chain, nd: RootAdjunction, g: TowerWord) -> tuple[int, TowerWord, int]:
    """(a, d, b) with ``g = u^a d u^b`` and d the least coset representative over ``g<u>``."""
    return nd.cyc.double_coset(g)


_SEARCH_BUDGET = 64


class _Cyclic:
    """Cached searches in the infinite cyclic subgroup generated by a cyclically reduced u."""

    def __init__(self, chain, u: TowerWord, n_base: int):
        self.chain = chain
        self.u = u
        self.n_base = n_base
        self.ulen = max(1, len(_spell(chain, u)))
        self._pow: dict = {}
        self._pow_of: dict = {}
        self._coset: dict = {}
        self._lower: dict = {}

    def pow(self, q: int) -> TowerWord:
        hit = self._pow.get(q)
        if hit is None:
            hit = _pow(self.chain, self.u, q)
            self._pow[q] = hit
        return hit

    def lower(self, rank: int) -> Optional[tuple[int, "_Cyclic"]]:
        """(m, cyclic subgroup of u^m) with m least such that u^m has rank <= rank."""
        if self.u.rank <= rank:
            return 1, self
        if rank in self._lower:
            return self._lower[rank]
        res = None
        P = _pieces(self.chain, self.u)
        if len(P) == 1 and P[0][0] == _T:
            nd = self.chain[self.u.rank - 1]
            e = P[0][1]
            m = nd.degree // gcd(nd.degree, e)
            sub = _Cyclic(self.chain, self.pow(m), self.n_base).lower(rank)
            if sub is not None:
                res = (m * sub[0], sub[1])
        self._lower[rank] = res
        return res

    def power_of(self, x: TowerWord) -> Optional[int]:
        if x.is_identity():
            return 0
        hit = self._pow_of.get(x, False)
        if hit is not False:
            return hit
        chain, u = self.chain, self.u
        res = None
        if x.rank < u.rank:
            low = self.lower(x.rank)
            if low is not None and low[1] is not self:
                q = low[1].power_of(x)
                res = None if q is None else q * low[0]
            self._pow_of[x] = res
            return res
        au = _ab(chain, u, self.n_base)
        ax = _ab(chain, x, self.n_base)
        nz = next((i for i, c in enumerate(au) if c != 0), None)
        if nz is not None:
            q = ax[nz] / au[nz]
            if q.denominator == 1 and all(a == q * b for a, b in zip(ax, au)):
                if self.pow(int(q)) == x:
                    res = int(q)
        elif not any(ax):
            if u.rank == 0 and x.rank == 0:
                n, m = len(x.syl), len(u.syl)
                if n % m == 0:
                    for q in (n // m, -(n // m)):
                        if self.pow(q) == x:
                            res = q
            else:
                bound = len(_spell(chain, x)) + 1
                for q in range(1, bound + 1):
                    if self.pow(q) == x:
                        res = q
                        break
                    if self.pow(-q) == x:
                        res = -q
                        break
        self._pow_of[x] = res
        return res

    def coset(self, g: TowerWord) -> tuple[int, TowerWord]:
        hit = self._coset.get(g)
        if hit is not None:
            return hit
        chain, u = self.chain, self.u
        if u.rank > g.rank and self.lower(g.rank) is not None:
            m, sub = self.lower(g.rank)
            k, rep = sub.coset(g)
            res = (k * m, rep)
        elif u.rank == 0 and g.rank == 0:
            ub, gw = u.syl, g.syl
            span = 2 * len(gw) // len(ub) + 1
            best_k, best = 0, gw
            best_key = K.shortlex_key(gw)
            for k in range(-span, span + 1):
                if k == 0:
                    continue
                cand = K.mul(K.power(ub, -k), gw)
                ck = K.shortlex_key(cand)
                if ck < best_key:
                    best_k, best, best_key = k, cand, ck
            res = (best_k, TowerWord.free(best))
        elif g.rank > u.rank and self._shortcut(g) is not None:
            res = self._shortcut(g)
        else:
            total, cur = 0, g
            for _ in range(_SEARCH_BUDGET):
                span = 2 * len(_spell(chain, cur)) // self.ulen + 2
                best_k, best, best_key = 0, cur, _key(chain, cur)
                for k in range(-span, span + 1):
                    if k == 0:
                        continue
                    cand = _mul(chain, self.pow(-k), cur)
                    ck = _key(chain, cand)
                    if ck < best_key:
                        best_k, best, best_key = k, cand, ck
                if best_k == 0:
                    break
                total += best_k
                cur = best
            else:
                raise ConjugacyBudgetExceeded("coset representative search did not settle")
            res = (total, cur)
        self._coset[g] = res
        return res

    def _shortcut(self, g: TowerWord) -> Optional[tuple[int, TowerWord]]:
        """Coset search when u lies below the rank of g: only the first syllable moves.

        None when a shifted first syllable could pinch into the next t-syllable.
        """
        hit = self._coset.get(("sc", g))
        if hit is not None:
            return hit or None
        chain = self.chain
        top = chain[g.rank - 1]
        kind, h0 = _pieces(chain, g)[0]
        res = False
        if kind == _T:
            res = (0, g)
        else:
            k, rep0 = self.coset(h0)
            if top.cyc.power_of(rep0) is None and not self._pinches(top, h0):
                q, rep = top.cyc.coset(rep0)
                res = (k, TowerWord(g.rank, q, (rep,) + g.syl[1:]))
        self._coset[("sc", g)] = res
        return res or None

    def _pinches(self, top: RootAdjunction, h0: TowerWord) -> bool:
        """Whether some ``u^-k h0`` falls in ``<u_top>`` for k in the search window."""
        span = 2 * len(_spell(self.chain, h0)) // self.ulen + 2
        return any(
            top.cyc.power_of(_mul(self.chain, self.pow(-k), h0)) is not None for k in range(-span, span + 1) if k
        )

    def double_coset(self, g: TowerWord) -> tuple[int, TowerWord, int]:
        hit = self._coset.get(("dc", g))
        if hit is not None:
            return hit
        chain = self.chain
        if self.u.rank > g.rank and self.lower(g.rank) is not None:
            m, sub = self.lower(g.rank)
            a, d, b = sub.double_coset(g)
            res = (a * m, d, b * m)
            self._coset[("dc", g)] = res
            return res
        a, d = self.coset(g)
        b = 0
        best_key = _key(chain, d)
        for _ in range(_SEARCH_BUDGET):
            span = 2 * len(_spell(chain, d)) // self.ulen + 2
            step = None
            for k in range(-span, span + 1):
                if k == 0:
                    continue
                q, rep = self.coset(_mul(chain, d, self.pow(-k)))
                ck = _key(chain, rep)
                if ck < best_key:
                    step, best_key, found = k, ck, (q, rep)
            if step is None:
                break
            # d = u^q rep u^step
            a += found[0]
            b += step
            d = found[1]
        else:
            raise ConjugacyBudgetExceeded("double coset search did not settle")
        res = (a, d, b)
        self._coset[("dc", g)] = res
        return res


def _pieces(chain, x: TowerWord) -> list:
    """Syllables of x at its rank with the leading ``u^k`` absorbed into the first."""
    nd = chain[x.rank - 1]
    first = x.syl[0]
    if isinstance(first, int):
        p0 = (_T, nd.degree * x.lead + first)
    else:
        p0 = (_H, first if x.lead == 0 else _mul(chain, _base_pow(nd, x.lead), first))
    out = [p0]
    for item in x.syl[1:]:
        out.append((_T, item) if isinstance(item, int) else (_H, item))
    return out


def _piece_elt(chain, rank: int, piece) -> TowerWord:
    kind, val = piece
    if kind == _H:
        return val
    t = chain[rank - 1].letter
    return _nf(chain, rank, (t if val > 0 else -t,) * abs(val))


def _product(chain, xs: Iterable[TowerWord]) -> TowerWord:
    acc = IDENTITY
    for x in xs:
        acc = _mul(chain, acc, x)
    return acc


def _conj(chain, g: TowerWord, x: TowerWord) -> TowerWord:
    """``g^-1 x g``."""
    return _mul(chain, _mul(chain, _inv(chain, g), x), g)


def conj_canon(chain, x: TowerWord) -> tuple[TowerWord, TowerWord]:
    """(h, c) with ``x = h c h^-1`` and c a canonical representative of the conjugacy class.

    At rank r a cyclically reduced element with at least two pieces is written as a cyclic
    sequence ``t^E1 d1 ... t^Em dm`` with each d a double-coset representative; that
    sequence is a conjugacy invariant and its least rotation picks c.
    """
    h_acc = IDENTITY
    while True:
        if x.rank == 0:
            core, conj = cyclic_core(x.syl)
            return _mul(chain, h_acc, TowerWord.free(conj)), TowerWord.free(core)
        P = _pieces(chain, x)
        if len(P) == 1:
            return h_acc, x
        if P[0][0] != P[-1][0]:
            break
        last = _piece_elt(chain, x.rank, P[-1])
        x = _mul(chain, _mul(chain, last, x), _inv(chain, last))
        h_acc = _mul(chain, h_acc, _inv(chain, last))
    r = x.rank
    nd = chain[r - 1]
    s = nd.degree
    if P[0][0] == _H:
        h_acc = _mul(chain, h_acc, P[0][1])
        P = P[1:] + P[:1]
    m = len(P) // 2
    E = [P[2 * i][1] for i in range(m)]
    D = []
    bs = []
    for i in range(m):
        a_i, d_i, b_i = _double_coset(chain, nd, P[2 * i + 1][1])
        E[i] += s * a_i
        if i + 1 < m:
            E[i + 1] += s * b_i
        else:
            E[0] += s * b_i
        D.append(d_i)
        bs.append(b_i)
    h_acc = _mul(chain, h_acc, _base_pow(nd, -bs[-1]))
    seq = [(E[i], _key(chain, D[i])) for i in range(m)]
    i0 = min(range(m), key=lambda i: seq[i:] + seq[:i])
    t = nd.letter

    def flat(i: int) -> tuple[int, ...]:
        return (t if E[i] > 0 else -t,) * abs(E[i]) + _spell(chain, D[i])

    lead = sum((flat(i) for i in range(i0)), ())
    body = sum((flat(i) for i in list(range(i0, m)) + list(range(i0))), ())
    h = _mul(chain, h_acc, _nf(chain, r, lead))
    return h, _nf(chain, r, body)


def oriented_canon(chain, x: TowerWord) -> tuple[TowerWord, TowerWord, int]:
    """(h, c, sigma) with ``x = h c^sigma h^-1``; c is the least of the classes of x and x^-1."""
    h, c = conj_canon(chain, x)
    g, ci = conj_canon(chain, _inv(chain, c))
    if _key(chain, ci) < _key(chain, c):
        return _mul(chain, h, g), ci, -1
    return h, c, 1


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def _cyclic_root(chain, c: TowerWord) -> tuple[TowerWord, int]:
    """Primitive root of a cyclically reduced c inside its own rank."""
    if c.rank == 0:
        d = primitive_period(c.syl)
        return TowerWord.free(c.syl[:d]), len(c.syl) // d
    r = c.rank
    nd = chain[r - 1]
    P = _pieces(chain, c)
    if len(P) == 1:
        return _nf(chain, r, (nd.letter,)), P[0][1]
    n = len(P)
    ulen = max(1, len(_spell(chain, nd.base)))
    span = len(_spell(chain, c)) // ulen + 2
    for d in _divisors(n):
        if d == n:
            break
        e = n // d
        head = _product(chain, (_piece_elt(chain, r, p) for p in P[:d]))
        for b in sorted(range(-span, span + 1), key=abs):
            y = _mul(chain, head, _base_pow(nd, b))
            if _pow(chain, y, e) == c:
                return y, e
    return c, 1


class Tower:
    """An immutable tower; :meth:`adjoin_root` returns an extended tower sharing earlier ranks."""

    def __init__(
        self,
        generators: Union[Alphabet, Iterable[str]],
        pi: Optional[PiSet] = None,
        adjunctions: tuple[RootAdjunction, ...] = (),
        conj_budget: int = _SEARCH_BUDGET,
    ):
        self.base_alphabet = generators if isinstance(generators, Alphabet) else Alphabet(generators)
        self.pi = pi if pi is not None else PiSet()
        self.adjunctions = adjunctions
        self.conj_budget = conj_budget
        names = list(self.base_alphabet.names) + [a.name for a in adjunctions]
        self.alphabet = Alphabet(names)
        self._roots: Optional[dict] = None

    # -- structure

    @property
    def rank(self) -> int:
        return len(self.adjunctions)

    @property
    def n_base(self) -> int:
        return len(self.base_alphabet)

    @property
    def chain(self) -> tuple[RootAdjunction, ...]:
        return self.adjunctions

    def extends(self, other: "Tower") -> bool:
        """True iff ``other`` is a prefix of this tower (same nodes)."""
        if self.base_alphabet != other.base_alphabet or other.rank > self.rank:
            return False
        return all(a is b for a, b in zip(self.adjunctions, other.adjunctions))

    def levels(self) -> list[int]:
        """Level boundaries k_1 < k_2 < ...: the last index of each level."""
        out = []
        for a in self.adjunctions:
            if out and self.adjunctions[out[-1] - 1].level == a.level:
                out[-1] = a.index
            else:
                out.append(a.index)
        return out

    def adjoin_root(self, u, s: int, name: Optional[str] = None) -> "Tower":
        """Adjoin t with ``t^s = u``; u must be cyclically reduced and primitive here."""
        u = self.normal_form(u) if not isinstance(u, TowerWord) else u
        if u.is_identity():
            raise NotPrimitiveError("cannot adjoin a root of the identity")
        if s < 2 or not self.pi.admits(s):
            raise PiViolation(f"degree {s} is not in Z_pi for pi = {{{self.pi}}}")
        if not self.is_cyclically_reduced(u):
            raise TowerError("base must be cyclically reduced")
        h, r, m = self.root(u)
        if abs(m) != 1:
            raise NotPrimitiveError(f"base is a proper power (exponent {abs(m)})")
        name = name or f"t{self.rank + 1}"
        if name in self.alphabet:
            raise TowerError(f"letter {name!r} is not fresh")
        parent = self.adjunctions[-1] if self.adjunctions else None
        node = RootAdjunction(parent, self.n_base, u, s, name)
        return Tower(self.base_alphabet, self.pi, self.adjunctions + (node,), self.conj_budget)

    # -- words

    def letters(self, raw) -> tuple[int, ...]:
        if isinstance(raw, str):
            if not raw.strip():
                return ()
            return to_letters(parse_word(raw), self.alphabet.index)
        out = []
        for y in raw:
            if isinstance(y, tuple):
                out.append(self.alphabet.letter(*y))
            else:
                y = int(y)
                if y == 0 or abs(y) > len(self.alphabet):
                    raise AlphabetError(y)
                out.append(y)
        return tuple(out)

    def normal_form(self, raw) -> TowerWord:
        """Canonical normal form of a word (string, letter ints, or FreeWord)."""
        if isinstance(raw, TowerWord):
            return raw
        if hasattr(raw, "letters") and not isinstance(raw, str):
            raw = raw.letters
        letters = self.letters(raw)
        rank = max((abs(y) - self.n_base for y in letters), default=0)
        return _nf(self.chain, max(rank, 0), letters)

    def equal(self, x, y) -> bool:
        return self.normal_form(x) == self.normal_form(y)

    def mul(self, *xs) -> TowerWord:
        return _product(self.chain, (self.normal_form(x) for x in xs))

    def inverse(self, x) -> TowerWord:
        return _inv(self.chain, self.normal_form(x))

    def power(self, x, n: int) -> TowerWord:
        return _pow(self.chain, self.normal_form(x), n)

    def conjugate(self, x, g) -> TowerWord:
        """``g^-1 x g``."""
        return _conj(self.chain, self.normal_form(g), self.normal_form(x))

    def spell(self, x) -> tuple[int, ...]:
        return _spell(self.chain, self.normal_form(x))

    def format(self, x) -> str:
        return self.alphabet.format(self.beta(x))

    def abelianize(self, x) -> tuple[Fraction, ...]:
        """Image under the homomorphism to Q^N sending d_i to the i-th basis vector."""
        return tuple(_ab(self.chain, self.normal_form(x), self.n_base))

    def base_of(self, j: int) -> TowerWord:
        return self.adjunctions[j - 1].base

    def letter_of(self, j: int) -> int:
        return self.n_base + j

    # -- invariants

    def t_length(self, x, j: int) -> int:
        """Number of <t_j>-syllables of x in its normal form (nested syllables included)."""
        x = self.normal_form(x)
        chain = self.chain

        def count(w: TowerWord) -> int:
            if w.rank < j or w.rank == 0:
                return 0
            P = _pieces(chain, w)
            if w.rank == j:
                return sum(1 for kind, _ in P if kind == _T)
            return sum(count(val) for kind, val in P if kind == _H)

        return count(x)

    def power_of_u(self, j: int, x) -> Optional[int]:
        """k with ``x = u_j^k`` or None."""
        x = self.normal_form(x)
        if x.rank >= j:
            raise TowerError(f"element must lie below rank {j}")
        return _power_of_u(self.adjunctions[j - 1], x)

    def is_cyclically_reduced(self, x) -> bool:
        x = self.normal_form(x)
        if x.rank == 0:
            return K.cyclic_split(x.syl) == 0 and (not x.syl or x.syl[0] != -x.syl[-1])
        P = _pieces(self.chain, x)
        return len(P) == 1 or P[0][0] != P[-1][0]

    def conj_canon(self, x) -> tuple[TowerWord, TowerWord]:
        return conj_canon(self.chain, self.normal_form(x))

    def is_conjugate(self, x, y) -> Optional[TowerWord]:
        """Some c with ``c^-1 x c = y``, or None (canonical-representative comparison)."""
        hx, cx = self.conj_canon(x)
        hy, cy = self.conj_canon(y)
        if cx != cy:
            return None
        return _mul(self.chain, hx, _inv(self.chain, hy))

    def _root_index(self) -> dict:
        if self._roots is None:
            idx = {}
            for a in self.adjunctions:
                if a._canon is None:
                    a._canon = oriented_canon(a.chain, a.base)
                idx[a._canon[1]] = a
            self._roots = idx
        return self._roots

    def root(self, x) -> tuple[TowerWord, TowerWord, int]:
        """(h, r, m) with ``x = h r^m h^-1`` and r a canonical primitive element of this tower."""
        chain = self.chain
        x = self.normal_form(x)
        if x.is_identity():
            raise NotPrimitiveError("the identity has no primitive root")
        h, c = conj_canon(chain, x)
        y, m = _cyclic_root(chain, c)
        h2, r, sigma = oriented_canon(chain, y)
        h = _mul(chain, h, h2)
        m *= sigma
        index = self._root_index()
        while r in index:
            a = index[r]
            hk, _, sk = a._canon
            h = _mul(chain, h, _inv(chain, hk))
            r = _nf(chain, a.index, (a.letter,))
            m *= sk * a.degree
        return h, r, m

    def beta(self, x) -> tuple[int, ...]:
        """Canonical representative: a reduced word in the free group on d's and t's.

        Powers of adjoined bases are spelled as literal powers of the base's spelling.
        """
        x = self.normal_form(x)
        if not x.is_identity():
            for a in self.adjunctions[x.rank:]:
                q = _power_of_u(a, x)
                if q:
                    return K.power(_spell(self.chain, a.base), q)
        return _spell(self.chain, x)

    def describe(self) -> list[str]:
        """Lines ``root t1 = (a)^(1/2)``; the textual tower format."""
        return [
            f"root {a.name} = ({self.alphabet.format(_spell(self.chain, a.base))})^(1/{a.degree})"
            for a in self.adjunctions
        ]

    @classmethod
    def parse(cls, generators, lines: Iterable[str], pi: Optional[PiSet] = None) -> "Tower":
        """Inverse of :meth:`describe`."""
        tw = cls(generators, pi)
        for line in lines:
            line = line.strip()
            if not line:
                continue
            head, _, rhs = line.partition("=")
            parts = head.split()
            if len(parts) != 2 or parts[0] != "root":
                raise TowerError(f"bad tower line: {line!r}")
            rhs = rhs.strip()
            if not rhs.startswith("(") or ")^(1/" not in rhs or not rhs.endswith(")"):
                raise TowerError(f"bad tower line: {line!r}")
            body, _, deg = rhs[1:].rpartition(")^(1/")
            tw = tw.adjoin_root(body, int(deg[:-1]), name=parts[1])
        return tw


def select_vn(tower: Tower, pi: PiSet, n: int, max_length: Optional[int] = None) -> list[TowerWord]:
    """A maximal set of cyclically minimal primitive elements of length <= m_n, pairwise
    with non-conjugate centralizers, chosen greedily in shortlex order.

    Length is the length of the canonical spelling (free length at rank 0).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    m = max_length if max_length is not None else zpi_nth(pi, n)
    seen: set = set()
    out = []
    chain = tower.chain
    for w in enumerate_reduced(len(tower.alphabet), m, 1):
        x = tower.normal_form(w)
        if tower.beta(x) != w:
            continue
        _, c = conj_canon(chain, x)
        if len(_spell(chain, c)) != len(w):
            continue
        try:
            _, r, k = tower.root(x)
        except NotPrimitiveError:
            continue
        if abs(k) != 1 or r in seen:
            continue
        seen.add(r)
        out.append(x)
    return out


def periodic_words(period: Sequence[int], max_len: int) -> set[tuple[int, ...]]:
    """All nonempty subwords of length <= max_len of powers of ``period`` or its inverse."""
    out = set()
    for p in (tuple(period), K.inverse(tuple(period))):
        n = len(p)
        if not n:
            continue
        long = p * (max_len // n + 2)
        for start in range(n):
            for length in range(1, max_len + 1):
                out.add(long[start:start + length])
    return out
