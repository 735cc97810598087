"""The compiled kernels must agree with the Python reference on every input."""

import pytest
from hypothesis import given, strategies as st

from freeqpi import _pykernels as P
from freeqpi import kernels

try:
    from freeqpi import _ckernels as C
except ImportError:  # pragma: no cover - extension not built
    C = None

needs_c = pytest.mark.skipif(C is None, reason="compiled kernels not built")

letters = st.integers(-4, 4).filter(bool)
raw = st.lists(letters, max_size=30).map(tuple)
reduced = raw.map(P.free_reduce)


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_reduce_examples():
    assert P.free_reduce((1, -1, 2)) == (2,)
    assert P.free_reduce(()) == ()
    assert P.free_reduce((1, 2, -2, 1)) == (1, 1)


@given(raw, raw)
def test_reduce_is_homomorphism(a, b):
    ra, rb = P.free_reduce(a), P.free_reduce(b)
    assert P.free_reduce(a + b) == P.mul(ra, rb)
    assert P.free_reduce(ra) == ra


@given(reduced, st.integers(-5, 5))
def test_power_matches_repeat(w, n):
    want = P.free_reduce((w if n >= 0 else P.inverse(w)) * abs(n))
    assert P.power(w, n) == want


@needs_c
@given(raw, reduced, reduced, st.integers(-6, 6))
def test_backends_agree(r, a, b, n):
    assert C.free_reduce(r) == P.free_reduce(r)
    assert C.mul(a, b) == P.mul(a, b)
    assert C.inverse(a) == P.inverse(a)
    assert C.power(a, n) == P.power(a, n)
    assert C.cyclic_split(a) == P.cyclic_split(a)
    assert C.shortlex_key(a) == P.shortlex_key(a)


@needs_c
@given(reduced, st.lists(reduced, min_size=4, max_size=4))
def test_substitute_agrees(w, images):
    img = {i + 1: x for i, x in enumerate(images)}
    assert C.substitute(w, img) == P.substitute(w, img)


def test_letter_order():
    # a < a^-1 < b < b^-1
    assert sorted([2, -1, 1, -2], key=P.letter_key) == [1, -1, 2, -2]
