import pytest
from hypothesis import given, strategies as st

from freeqpi import kernels as K
from freeqpi.free_core import (
    Alphabet,
    AlphabetError,
    FreeWord,
    IdentityRootError,
    cyclic_reduce,
    enumerate_reduced,
    free_factor_member,
    is_conjugate,
    reduce,
    root_extract,
)
from freeqpi.syntax import parse_word, to_letters

AB = Alphabet(["a", "b"])
ABT = Alphabet(["a", "b", "t"])


def w(text, alpha=AB):
    return reduce(to_letters(parse_word(text), alpha.index))


def test_reduce_examples():
    assert reduce([("a", 1), ("a", -1), ("b", 1)], AB) == w("b")
    assert reduce([], AB) == FreeWord()
    assert w("a b b^-1 a") == w("a a")
    with pytest.raises(AlphabetError):
        reduce([("c", 1)], AB)


def test_cyclic_reduce_examples():
    core, conj = cyclic_reduce(w("a b a^-1"))
    assert (core, conj) == (w("b"), w("a"))
    core, conj = cyclic_reduce(w("b a"))
    assert core == w("a b")
    assert conj * core * conj.inverse() == w("b a")
    assert cyclic_reduce(w("a")) == (w("a"), FreeWord())


def test_root_extract_examples():
    assert root_extract(w("a b a b")) == (w("a b"), 2)
    assert root_extract(w("a b^-1")) == (w("a b^-1"), 1)
    x = w("a b b a^-1")
    assert root_extract(x * x * x) == (w("a b a^-1"), 6)
    with pytest.raises(IdentityRootError):
        root_extract(FreeWord())


def test_is_conjugate_examples():
    c = is_conjugate(w("a b"), w("b a"))
    assert c is not None and c.inverse() * w("a b") * c == w("b a")
    assert c == w("a")  # shortlex-least among a, b^-1, ...
    assert is_conjugate(w("a"), w("b")) is None
    x = w("a b^-1 a a")
    assert is_conjugate(x, x) == FreeWord()


def test_free_factor_member_examples():
    assert free_factor_member(w("a b^-1 a"), {"a", "b"}, AB)
    assert not free_factor_member(w("a t a^-1", ABT), {"a", "b"}, ABT)
    assert free_factor_member(FreeWord(), set())


def test_enumerate_reduced_counts():
    # 4 * 3^(n-1) reduced words of length n over two generators
    words = list(enumerate_reduced(2, 4))
    assert len(words) == 1 + 4 + 12 + 36 + 108
    assert words == sorted(words, key=K.shortlex_key)


letters = st.integers(-3, 3).filter(bool)
words = st.lists(letters, max_size=14).map(lambda xs: FreeWord(K.free_reduce(tuple(xs))))


@given(words, words)
def test_reduce_homomorphism(x, y):
    assert reduce(x.letters + y.letters) == x * y
    assert reduce(x.letters) == x


@given(words)
def test_root_soundness(x):
    if x.is_identity():
        return
    r, e = root_extract(x)
    assert r ** e == x
    assert root_extract(r)[1] == 1


@given(words, words)
def test_conjugacy_verifies_and_is_symmetric(x, g):
    y = g.inverse() * x * g
    c = is_conjugate(x, y)
    assert c is not None
    assert c.inverse() * x * c == y
    assert (is_conjugate(y, x) is None) == (c is None)


@given(words, words)
def test_conjugacy_symmetric_random(x, y):
    assert (is_conjugate(x, y) is None) == (is_conjugate(y, x) is None)


@given(words)
def test_cyclic_core_is_rotation(x):
    core, conj = cyclic_reduce(x)
    assert len(core) <= len(x)
    assert conj * core * conj.inverse() == x
    if len(core) > 1:
        assert core.letters[0] != -core.letters[-1]
    # core is a rotation of the cyclically reduced form
    k = K.cyclic_split(x.letters)
    mid = x.letters[k:len(x) - k]
    assert any(mid[i:] + mid[:i] == core.letters for i in range(max(len(mid), 1)))
