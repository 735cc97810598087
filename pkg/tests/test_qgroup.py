import threading
from fractions import Fraction as Fr

import pytest
from hypothesis import given, strategies as st

from freeqpi.pi_arith import PiViolation
from freeqpi.qgroup import LineageError, QGroup, commutator, is_identity, qexp


def test_group_ops():
    G = QGroup("ab", "2")
    a, b = G.gen("a"), G.gen("b")
    x = G.element("a b^-1 a")
    assert (x * x.inverse()).is_identity()
    assert (a * b).format() == "a*b"
    t = qexp(a, Fr(1, 2))
    assert t * t == a


def test_qexp_examples():
    G = QGroup("ab", "2")
    a, b = G.gen("a"), G.gen("b")
    t = qexp(a, Fr(1, 2))
    assert t.format() == "t1" and G.tower.describe() == ["root t1 = (a)^(1/2)"]
    t3 = qexp(a, Fr(3, 2))
    assert t3.format() == "t1^3" and t3 ** 2 == a ** 3
    assert qexp(b * a * b.inverse(), Fr(1, 2)).format() == "b*t1*b^-1"
    rank = G.tower.rank
    ab = a * b
    assert qexp(ab ** 2, Fr(1, 2)) == ab
    assert G.tower.rank == rank


def test_qexp_rejects_outside_pi():
    G = QGroup("ab", "2")
    with pytest.raises(PiViolation):
        qexp(G.gen("a"), Fr(1, 3))


def test_is_identity_examples():
    G = QGroup("ab", "2")
    a, b = G.gen("a"), G.gen("b")
    t = qexp(a, Fr(1, 2))
    assert is_identity(t ** 2 * a.inverse())
    assert not is_identity(a * b)
    assert is_identity(commutator(t, a))


def test_parse_with_rational_powers():
    G = QGroup("ab", "2,3")
    assert G.element("(a*b)^(3/2)") == G.element("(a b)^(1/2)") ** 3
    assert G.element("[a,b]") == G.element("a^-1 b^-1 a b")


def test_lineage_error():
    G, H = QGroup("ab", "2"), QGroup("ab", "2")
    with pytest.raises(LineageError):
        G.gen("a") * H.gen("a")


def test_at_most_one_root_per_call():
    G = QGroup("ab", "2,3")
    g = G.element("a b a")
    before = G.tower.rank
    qexp(g, Fr(5, 6))
    assert G.tower.rank <= before + 1
    r = G.tower.rank
    qexp(g, Fr(1, 6))
    qexp(g, Fr(-7, 3))
    assert G.tower.rank == r


def test_concurrent_qexp_serialized():
    G = QGroup("ab", "2")
    a = G.gen("a")
    out = []

    def work():
        out.append(qexp(a, Fr(1, 2)))

    ts = [threading.Thread(target=work) for _ in range(8)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    assert G.tower.rank == 1
    assert all(x == out[0] for x in out)


def test_power_criterion():
    for p in (2, 3, 5, 7):
        G = QGroup("ab", "2,3")
        a = G.gen("a")
        if p in (2, 3):
            assert qexp(a, Fr(1, p)) ** p == a
        else:
            with pytest.raises(PiViolation):
                qexp(a, Fr(1, p))


GROUP = QGroup("ab", "2,3,5")
syl = st.sampled_from(["a", "b", "a^-1", "b^-1"])
elts = st.lists(syl, min_size=1, max_size=4).map(lambda xs: GROUP.element(" ".join(xs)))
rats = st.builds(Fr, st.integers(-6, 6), st.sampled_from([1, 2, 3, 4, 5, 6, 8]))


@given(elts, rats, rats)
def test_exponent_laws(g, al, be):
    one = GROUP.identity()
    assert g ** Fr(1) == g
    assert (g ** Fr(0)).is_identity()
    assert (one ** al).is_identity()
    assert g ** (al + be) == (g ** al) * (g ** be)
    assert g ** (al * be) == (g ** al) ** be


@given(elts, elts, rats)
def test_conjugation_law(g, h, al):
    hi = h.inverse()
    assert (hi * g * h) ** al == hi * (g ** al) * h


@given(elts, rats, rats, rats)
def test_commuting_law(c, x, y, al):
    g, h = c ** x, c ** y
    assert (g * h) ** al == (g ** al) * (h ** al)
