"""Exact computation in a finitely generated free group.

Words are tuples of nonzero ints (generator ``i`` is ``i``, its inverse ``-i``),
always freely reduced.  :class:`FreeWord` wraps such a tuple for the public API.
Shortlex, with letters ordered ``a < a^-1 < b < b^-1 < ...`` by declaration
order, is the tie-breaker for every canonical choice.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Optional, Sequence

from . import kernels as K


class AlphabetError(KeyError):
    pass


class IdentityRootError(ValueError):
    """The identity has no primitive root."""


class Alphabet:
    """Ordered generator names; generator ``names[i]`` is letter ``i + 1``."""

    def __init__(self, names: Iterable[str]):
        self.names: tuple[str, ...] = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise ValueError("generator names must be unique")
        self._index = {n: i + 1 for i, n in enumerate(self.names)}

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"Alphabet({list(self.names)})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise AlphabetError(name) from None

    def extend(self, name: str) -> "Alphabet":
        if name in self._index:
            raise ValueError(f"letter {name!r} is not fresh")
        return Alphabet(self.names + (name,))

    def letter(self, name: str, sign: int = 1) -> int:
        return self.index(name) * (1 if sign > 0 else -1)

    def name_of(self, x: int) -> str:
        if x == 0 or abs(x) > len(self.names):
            raise AlphabetError(x)
        return self.names[abs(x) - 1]

    def format(self, w: Sequence[int]) -> str:
        """Render as ``a*b^-1*a^3`` (``1`` for the identity)."""
        if not w:
            return "1"
        parts = []
        i = 0
        while i < len(w):
            j = i
            while j < len(w) and w[j] == w[i]:
                j += 1
            e = (j - i) * (1 if w[i] > 0 else -1)
            name = self.names[abs(w[i]) - 1]
            parts.append(name if e == 1 else f"{name}^{e}")
            i = j
        return "*".join(parts)


class FreeWord:
    """A freely reduced word; equality is sequence equality."""

    __slots__ = ("letters",)

    def __init__(self, letters: Iterable[int] = ()):
        self.letters: tuple[int, ...] = K.free_reduce(tuple(letters))

    @classmethod
    def _trusted(cls, letters: tuple[int, ...]) -> "FreeWord":
        w = object.__new__(cls)
        w.letters = letters
        return w

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FreeWord) and self.letters == other.letters

    def __hash__(self) -> int:
        return hash(self.letters)

    def __lt__(self, other: "FreeWord") -> bool:
        return K.shortlex_key(self.letters) < K.shortlex_key(other.letters)

    def __mul__(self, other: "FreeWord") -> "FreeWord":
        return FreeWord._trusted(K.mul(self.letters, other.letters))

    def __pow__(self, n: int) -> "FreeWord":
        return FreeWord._trusted(K.power(self.letters, n))

    def inverse(self) -> "FreeWord":
        return FreeWord._trusted(K.inverse(self.letters))

    def __repr__(self) -> str:
        return f"FreeWord({list(self.letters)})"

    def pairs(self) -> list[tuple[int, int]]:
        """The letters as ``(generator index, sign)`` with 0-based index."""
        return [(abs(x) - 1, 1 if x > 0 else -1) for x in self.letters]

    def is_identity(self) -> bool:
        return not self.letters


def reduce(letters: Iterable, alphabet: Optional[Alphabet] = None) -> FreeWord:
    """Freely reduce a raw letter sequence.

    Items are signed ints, or ``(name, sign)`` pairs when an alphabet is given.
    """
    raw = []
    for item in letters:
        if isinstance(item, tuple):
            if alphabet is None:
                raise AlphabetError(item)
            name, sign = item
            raw.append(alphabet.letter(name, sign))
        else:
            x = int(item)
            if x == 0 or (alphabet is not None and abs(x) > len(alphabet)):
                raise AlphabetError(x)
            raw.append(x)
    return FreeWord(raw)


def _as_tuple(w) -> tuple[int, ...]:
    return w.letters if isinstance(w, FreeWord) else tuple(w)


def least_rotation(w: tuple[int, ...]) -> int:
    """Offset of the shortlex-least cyclic rotation of w."""
    n = len(w)
    if n == 0:
        return 0
    keys = [K.letter_key(x) for x in w]
    doubled = keys + keys
    best = 0
    for i in range(1, n):
        if doubled[i:i + n] < doubled[best:best + n]:
            best = i
    return best


def cyclic_core(w: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Tuple-level :func:`cyclic_reduce`: returns (core, conjugator)."""
    n = len(w)
    k = K.cyclic_split(w)
    mid = w[k:n - k]
    i = least_rotation(mid)
    core = mid[i:] + mid[:i]
    conj = w[:k] + mid[:i]
    return core, conj


def cyclic_reduce(w: FreeWord) -> tuple[FreeWord, FreeWord]:
    """Return (core, conjugator) with ``w = conjugator * core * conjugator^-1``.

    The core is the shortlex-least rotation of the cyclically reduced form.
    """
    core, conj = cyclic_core(_as_tuple(w))
    return FreeWord._trusted(core), FreeWord._trusted(conj)


def primitive_period(core: tuple[int, ...]) -> int:
    """Length of the shortest d with core == core[:d] repeated."""
    n = len(core)
    for d in range(1, n + 1):
        if n % d == 0 and core[:d] * (n // d) == core:
            return d
    return n


def root_tuple(w: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
    if not w:
        raise IdentityRootError("the identity has no primitive root")
    core, conj = cyclic_core(w)
    d = primitive_period(core)
    r = core[:d]
    root = K.mul(K.mul(conj, r), K.inverse(conj))
    return root, len(core) // d


def root_extract(w: FreeWord) -> tuple[FreeWord, int]:
    """Return (root, exponent) with ``w = root**exponent`` and root primitive."""
    root, e = root_tuple(_as_tuple(w))
    return FreeWord._trusted(root), e


def conjugator_tuple(w1: tuple[int, ...], w2: tuple[int, ...]) -> Optional[tuple[int, ...]]:
    """Shortlex-least c with ``c^-1 w1 c = w2``, or None."""
    if not w1 or not w2:
        return () if w1 == w2 else None
    k1, h1 = cyclic_core(w1)
    k2, h2 = cyclic_core(w2)
    if k1 != k2:
        return None
    c0 = K.mul(h1, K.inverse(h2))
    # every conjugator is c0 * rho^j with rho the root of w2
    d = primitive_period(k2)
    r = k2[:d]
    rho = K.mul(K.mul(h2, r), K.inverse(h2))
    span = (2 * len(c0) + 2 * len(h2)) // len(r) + 2
    best = c0
    for j in range(-span, span + 1):
        c = K.mul(c0, K.power(rho, j))
        if K.shortlex_key(c) < K.shortlex_key(best):
            best = c
    return best


def is_conjugate(w1: FreeWord, w2: FreeWord) -> Optional[FreeWord]:
    """Return the shortlex-least c with ``c^-1 w1 c = w2``, or None."""
    c = conjugator_tuple(_as_tuple(w1), _as_tuple(w2))
    return None if c is None else FreeWord._trusted(c)


def free_factor_member(w, subset: Iterable, alphabet: Optional[Alphabet] = None) -> bool:
    """True iff w uses only generators from ``subset``.

    The subset holds 1-based generator indices, or names when an alphabet is given.
    """
    allowed = {alphabet.index(g) if isinstance(g, str) and alphabet else g for g in subset}
    return all(abs(x) in allowed for x in _as_tuple(w))


def enumerate_reduced(n_gens: int, max_len: int, min_len: int = 0) -> Iterator[tuple[int, ...]]:
    """All reduced words of length in [min_len, max_len], in shortlex order."""
    letters = sorted(
        [i for i in range(1, n_gens + 1)] + [-i for i in range(1, n_gens + 1)],
        key=K.letter_key,
    )

    def extend(prefix: tuple[int, ...], left: int) -> Iterator[tuple[int, ...]]:
        if left == 0:
            yield prefix
            return
        for x in letters:
            if prefix and prefix[-1] == -x:
                continue
            yield from extend(prefix + (x,), left - 1)

    for length in range(min_len, max_len + 1):
        yield from extend((), length)
