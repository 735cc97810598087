import random

import pytest
from hypothesis import given, strategies as st

from freeqpi import kernels as K
from freeqpi.pi_arith import PiSet, PiViolation
from freeqpi.tower import NotPrimitiveError, Tower, TowerError, select_vn

PI = PiSet([2, 3])


@pytest.fixture(scope="module")
def t2a():
    return Tower(["a", "b"], PI).adjoin_root("a", 2, "t")


@pytest.fixture(scope="module")
def nested():
    return Tower(["a", "b"], PI).adjoin_root("a b a b^-1", 2).adjoin_root("t1 b", 2).adjoin_root("t1 b t1 b^-1", 3)


def test_relation_and_folding(t2a):
    assert t2a.normal_form("t t a^-1").is_identity()
    x, y = t2a.normal_form("a t"), t2a.normal_form("t t t")
    assert x == y
    assert (x.rank, x.lead, x.syl) == (1, 1, (1,))
    z = t2a.normal_form("b a b^-1")
    assert z.rank == 0 and t2a.format(z) == "b*a*b^-1"


def test_equal_examples(t2a):
    assert t2a.equal("t^2", "a")
    assert not t2a.equal("t b t^-1", "b")
    assert t2a.equal("a b t", "a b t")


def test_t_length_examples(t2a):
    assert t2a.t_length("t b t^-1", 1) == 2
    assert t2a.t_length("a", 1) == 0
    assert t2a.t_length("t^2 b", 1) == 0


def test_adjoin_root_examples():
    F = Tower(["a", "b"], PI)
    assert F.adjoin_root("a", 2).rank == 1
    with pytest.raises(NotPrimitiveError):
        F.adjoin_root("a^2", 2)
    with pytest.raises(PiViolation):
        F.adjoin_root("a", 5)
    with pytest.raises(NotPrimitiveError):
        F.adjoin_root("", 2)
    with pytest.raises(TowerError):
        F.adjoin_root("b a b^-1", 2)  # not cyclically reduced
    T = F.adjoin_root("a", 2).adjoin_root("t1 b", 3)
    assert T.rank == 2
    with pytest.raises(TowerError):
        F.adjoin_root("a", 2, name="b")


def test_power_of_u_examples():
    T = Tower(["a", "b"], PI).adjoin_root("a b", 2)
    assert T.power_of_u(1, "a b a b") == 2
    assert T.power_of_u(1, "b a") is None
    assert T.power_of_u(1, "") == 0


def test_beta_examples(t2a):
    assert t2a.beta(t2a.normal_form("a")) == (1,)
    assert t2a.alphabet.format(t2a.beta(t2a.normal_form("a t"))) == "t^3"


def test_beta_power_compatible(nested):
    for j in range(1, nested.rank + 1):
        u = nested.base_of(j)
        for n in range(-3, 4):
            assert nested.beta(nested.power(u, n)) == K.power(nested.beta(u), n)


def test_select_vn_examples():
    F = Tower(["a", "b"], PI)
    assert [F.format(x) for x in select_vn(F, PI, 2, max_length=1)] == ["a", "b"]
    assert [F.format(x) for x in select_vn(F, PiSet([2]), 2)] == ["a", "b", "a*b", "a*b^-1"]
    assert select_vn(Tower([], PI), PI, 2) == []


def test_describe_roundtrip(nested):
    again = Tower.parse(["a", "b"], nested.describe(), PI)
    assert again.describe() == nested.describe()
    assert [a.degree for a in again.adjunctions] == [2, 2, 3]


def _oracle_setup():
    # t1^2 = a, t2^3 = t1 b: H_2 is free on t1, t2 via a -> t1^2, b -> t1^-1 t2^3
    T = Tower(["a", "b"], PI).adjoin_root("a", 2).adjoin_root("t1 b", 3)
    img = {1: (1, 1), 2: (-1, 2, 2, 2), 3: (1,), 4: (2,)}

    def sub(w):
        out = ()
        for x in w:
            out = K.mul(out, img[x] if x > 0 else K.inverse(img[-x]))
        return out

    return T, sub


words = st.lists(st.integers(-4, 4).filter(bool), max_size=12).map(tuple)


@given(words, words)
def test_substitution_oracle(x, y):
    T, sub = _oracle_setup()
    assert T.equal(x, y) == (sub(x) == sub(y))
    assert T.equal(x, x + (3, 3, -1) + y[:0])  # relator insertion


@given(words, words, words)
def test_congruence(x, y, z):
    T, sub = _oracle_setup()
    if T.equal(x, y):
        assert T.equal(z + x + z, z + y + z)


@given(words)
def test_beta_is_section(x):
    T, sub = _oracle_setup()
    nx = T.normal_form(x)
    assert T.normal_form(T.beta(nx)) == nx
    assert sub(T.beta(nx)) == sub(x)


def test_nested_invariants(nested):
    rng = random.Random(7)
    n = len(nested.alphabet)
    rels = [K.mul((a.letter,) * a.degree, K.inverse(nested.spell(a.base))) for a in nested.adjunctions]

    def rw(k):
        return tuple(rng.choice([i for i in range(-n, n + 1) if i]) for _ in range(rng.randint(0, k)))

    for _ in range(60):
        x = rw(7)
        y = x
        for _ in range(2):
            k = rng.randint(0, len(y))
            r = rng.choice(rels)
            y = y[:k] + (r if rng.random() < 0.5 else K.inverse(r)) + y[k:]
        assert nested.equal(x, y)
        nx = nested.normal_form(x)
        assert nested.normal_form(nested.beta(nx)) == nx
        if nx.is_identity():
            continue
        g = rw(3)
        h, c = nested.conj_canon(x)
        assert nested.equal(nested.mul(h, c, nested.inverse(h)), x)
        assert nested.conj_canon(nested.mul(g, x, nested.inverse(g)))[1] == c
        hr, r, m = nested.root(x)
        assert nested.equal(nested.mul(hr, nested.power(r, m), nested.inverse(hr)), x)


def test_t_length_minimal_small():
    # no spelling reachable by one relator insertion has fewer t-syllables than the normal form
    T = Tower(["a", "b"], PI).adjoin_root("a", 2)
    rng = random.Random(3)
    for _ in range(40):
        x = tuple(rng.choice([1, -1, 2, -2, 3, -3]) for _ in range(rng.randint(1, 6)))
        nf = T.t_length(x, 1)
        for k in range(len(x) + 1):
            for rel in ((3, 3, -1), (1, -3, -3)):
                y = K.free_reduce(x[:k] + rel + x[k:])
                syl = sum(1 for i, c in enumerate(y) if abs(c) == 3 and (i == 0 or abs(y[i - 1]) != 3))
                assert syl >= nf
