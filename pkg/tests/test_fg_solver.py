import random
from fractions import Fraction as Fr
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from library import LIBRARY
from freeqpi.cli import parse_system
from freeqpi.eq_pipeline import check_solution, make_system
from freeqpi.fg_solver import (
    SOLVABLE, UNKNOWN, UNSOLVABLE, Assignment, BudgetExceeded, ConstrainedFreeSystem, CoverageError,
    LinearDiophantineSystem, decide_system, smith_normal_form, solvable_over_qpi, solve_bounded,
    solve_lin_dioph, verify_assignment,
)
from freeqpi.pi_arith import PiSet

CAP = 20
GRIDS = {n: np.array(list(product(range(CAP + 1), repeat=n))) for n in (1, 2, 3)}  # lexicographic order


def brute_least(sys):
    """First admissible point of the grid in lexicographic order, by vectorized filtering."""
    n = len(sys.variables)
    pts = GRIDS[n]
    ok = np.ones(len(pts), dtype=bool)
    col = {v: pts[:, i] for i, v in enumerate(sys.variables)}
    for coeffs, rhs in sys.equations:
        acc = np.zeros(len(pts), dtype=np.int64)
        for v, c in coeffs.items():
            acc += c * col[v]
        ok &= acc == rhs
    for v, pi in sys.zpi.items():
        ok &= np.array([x >= 2 and pi.admits(int(x)) for x in col[v]])
    for v in sys.positive:
        ok &= col[v] > 0
    for v in sys.zero:
        ok &= col[v] == 0
    if sys.minimality is not None:
        d, xs = sys.minimality
        for x in xs:
            dv = np.where(col[d] > 0, col[d], 1)
            ok &= ~((col[d] > 0) & (col[x] > 0) & (col[x] % dv == 0))
    idx = np.flatnonzero(ok)
    if not len(idx):
        return None
    return {v: int(pts[idx[0], i]) for i, v in enumerate(sys.variables)}


def random_system(rng):
    n = rng.randint(1, 3)
    names = ("x", "y", "z")[:n]
    eqs = []
    for _ in range(rng.randint(1, 2)):
        coeffs = {v: rng.randint(-8, 8) for v in names if rng.random() < 0.8}
        coeffs = {v: c for v, c in coeffs.items() if c}
        eqs.append((coeffs, rng.randint(-12, 24)))
    extra = {}
    r = rng.random()
    if r < 0.2:
        extra["zpi"] = {names[-1]: PiSet(rng.choice([[2], [3], [2, 3]]))}
        if n > 1 and rng.random() < 0.5:
            extra["minimality"] = (names[-1], names[:-1])
    elif r < 0.35:
        extra["positive"] = (names[0],)
    elif r < 0.45:
        extra["zero"] = (names[-1],)
    return LinearDiophantineSystem(names, tuple(eqs), **extra)


def combinatorial_systems():
    """Every single equation in one or two unknowns with |coefficients| <= 8, for a few right sides."""
    for n in (1, 2):
        names = ("x", "y")[:n]
        for coeffs in product(range(-8, 9), repeat=n):
            for rhs in (-5, 0, 7, 16):
                yield LinearDiophantineSystem(names, (({v: c for v, c in zip(names, coeffs) if c}, rhs),))


def generated_systems(count=3000, seed=7):
    rng = random.Random(seed)
    yield from combinatorial_systems()
    for _ in range(count):
        yield random_system(rng)


def test_lin_dioph_matches_enumeration():
    for sys in generated_systems():
        res = solve_lin_dioph(sys, CAP)
        assert res.solution == brute_least(sys), sys
        if res.status == "inconsistent":
            assert solve_lin_dioph(sys, 3 * CAP).solution is None


def test_lin_dioph_examples():
    s = LinearDiophantineSystem(("l1", "l2", "l3"), (({"l1": 1, "l2": -1}, -4), ({"l2": 1, "l3": -1}, 0)))
    assert solve_lin_dioph(s, CAP).solution == {"l1": 0, "l2": 4, "l3": 4}
    s = LinearDiophantineSystem(("x1", "x2", "d"), (({"x1": 1, "x2": 1, "d": -2}, 0),), zpi={"d": PiSet([2])})
    assert solve_lin_dioph(s, CAP).solution == {"x1": 0, "x2": 4, "d": 2}
    res = solve_lin_dioph(LinearDiophantineSystem(("x",), (({"x": 1}, -1),)), CAP)
    assert res.solution is None and res.status == "inconsistent"
    res = solve_lin_dioph(LinearDiophantineSystem(("x", "y"), (({"x": 1, "y": -1}, 30),)), CAP)
    assert res.solution is None and res.status == "exhausted"


MINIMALITY = [
    # (equations over x1 x2 d, pi for d or None, expected least solution or None)
    ([({"x1": 1, "d": -1}, 0)], [2], None),  # x1 = d is divisible by d
    ([({"x1": 1, "d": -2}, 0)], [2], None),
    ([({"x1": 2, "d": -1}, 0)], [2], {"x1": 1, "x2": 0, "d": 2}),
    ([({"x1": 1, "x2": 1, "d": -1}, 0)], None, {"x1": 0, "x2": 0, "d": 0}),
    ([({"x1": 1, "x2": 1, "d": -1}, 0), ({"x1": 1}, 1)], [3], {"x1": 1, "x2": 2, "d": 3}),
    ([({"x1": 1, "x2": 1, "d": -1}, 0), ({"x1": 1}, 2)], [2], {"x1": 2, "x2": 2, "d": 4}),
    ([({"x1": 1, "x2": -1, "d": -1}, 0), ({"x2": 1}, 1)], [2], {"x1": 3, "x2": 1, "d": 2}),
    ([({"x1": 1, "x2": -1}, 0), ({"x1": 1}, 4)], [2], {"x1": 4, "x2": 4, "d": 8}),
    ([({"x1": 1, "x2": 1}, 6)], [2, 3], {"x1": 0, "x2": 6, "d": 4}),
    ([({"x1": 3, "x2": -2, "d": -1}, 0), ({"x1": 1}, 2)], [2], {"x1": 2, "x2": 1, "d": 4}),
]


@pytest.mark.parametrize("eqs,pi,expected", MINIMALITY)
def test_minimality_condition(eqs, pi, expected):
    zpi = {"d": PiSet(pi)} if pi else {}
    s = LinearDiophantineSystem(("x1", "x2", "d"), tuple(eqs), zpi=zpi, minimality=("d", ("x1", "x2")))
    res = solve_lin_dioph(s, CAP)
    assert res.solution == expected
    assert res.solution == brute_least(s)
    # every solution dropped by the condition has a positive x divisible by d
    loose = LinearDiophantineSystem(s.variables, s.equations, zpi=zpi)
    for p in _admissible(loose):
        if not s.admits(p):
            assert any(p[x] > 0 and p["d"] > 0 and p[x] % p["d"] == 0 for x in ("x1", "x2"))


def _admissible(sys):
    for vals in product(range(8), repeat=len(sys.variables)):
        p = dict(zip(sys.variables, vals))
        if sys.admits(p):
            yield p


@settings(max_examples=40)
@given(st.lists(st.lists(st.integers(-6, 6), min_size=2, max_size=2), min_size=1, max_size=2),
       st.lists(st.integers(-6, 6), min_size=2, max_size=2))
def test_smith_normal_form(rows, b):
    U, D, V = smith_normal_form(rows)
    A = np.array(rows, dtype=object)
    assert (np.array(U, dtype=object).dot(A).dot(np.array(V, dtype=object)) == np.array(D, dtype=object)).all()
    diag = [D[i][i] for i in range(min(len(D), len(D[0])))]
    for i in range(len(D)):
        for j in range(len(D[0])):
            assert i == j or D[i][j] == 0
    nz = [d for d in diag if d]
    assert all(b2 % a2 == 0 for a2, b2 in zip(nz, nz[1:]))
    assert round(abs(np.linalg.det(np.array(U, dtype=float)))) == 1


def test_solvable_over_qpi():
    assert solvable_over_qpi([[2]], [1], PiSet([2]))
    assert not solvable_over_qpi([[3]], [1], PiSet([2]))
    assert not solvable_over_qpi([[1, -1], [1, -1]], [1, 0], PiSet([2]))
    assert not solvable_over_qpi([[2, 4]], [Fr(1, 3)], PiSet([3]))
    assert solvable_over_qpi([[2, 4]], [Fr(1, 3)], PiSet([2, 3]))


def free(**kw):
    return ConstrainedFreeSystem(("a", "b", "t"), **kw)


def test_solve_bounded_examples():
    s = free(variables=("x",), equations=((("var", "x", 1), ("word", (-1,))),))
    assert solve_bounded(s, 3).words == {"x": (1,)}
    s = free(variables=("x",), equations=((("var", "x", 2), ("word", (-1,))),))
    assert solve_bounded(s, 5) is None
    comm = (("x", "t"),)
    s = free(variables=("x",), commutations=comm)
    assert solve_bounded(s, 4).words == {"x": ()}
    s = free(variables=("x",), commutations=comm, inequations=("x",))
    assert solve_bounded(s, 4).words == {"x": (3,)}


def test_solve_bounded_constraints():
    # x = y t^E, y = b a in <a, b>, E = 2
    s = free(
        variables=("x", "y"),
        int_variables=("E",),
        equations=((("var", "x", -1), ("var", "y", 1), ("pow", "t", "E", 1)), (("var", "y", 1), ("word", (-1, -2))),),
        memberships=(("y", ("a", "b")),),
        linear=(({"E": 1}, 2),),
    )
    a = solve_bounded(s, 4)
    assert a.words == {"x": (2, 1, 3, 3), "y": (2, 1)} and a.ints == {"E": 2}
    assert verify_assignment(s, a)
    with pytest.raises(BudgetExceeded):
        solve_bounded(free(variables=("x", "y"), equations=((("var", "x", 1), ("var", "y", 1), ("var", "x", -1), ("var", "y", -1)),)), 3, max_candidates=10)


def test_verify_assignment():
    s = free(variables=("x",), equations=((("var", "x", 1), ("word", (-1,))),), memberships=(("x", ("a",)),), inequations=("x",))
    assert verify_assignment(s, Assignment({"x": (1,)}))
    s2 = free(variables=("x",), memberships=(("x", ("a",)),))
    assert not verify_assignment(s2, Assignment({"x": (2,)}))
    s3 = free(variables=("x",), inequations=("x",))
    assert not verify_assignment(s3, Assignment({"x": ()}))
    with pytest.raises(CoverageError):
        verify_assignment(s3, Assignment({}))


def brute_free(s, L):
    """Least assignment by plain enumeration of all reduced words."""
    from freeqpi.fg_solver import _words_over
    words = list(_words_over(range(1, len(s.alphabet) + 1), L))
    best = None
    for combo in product(words, repeat=len(s.variables)):
        a = Assignment(dict(zip(s.variables, combo)))
        if verify_assignment(s, a) and (best is None or a.key(s) < best.key(s)):
            best = a
    return best


@settings(max_examples=25)
@given(st.lists(st.sampled_from([("var", "x", 1), ("var", "x", -1), ("var", "y", 1), ("var", "y", -1),
                                 ("word", (1,)), ("word", (-2,)), ("word", (3,))]), min_size=1, max_size=4),
       st.booleans())
def test_solve_bounded_matches_enumeration(eq, ineq):
    s = ConstrainedFreeSystem(("a", "b", "t"), ("x", "y"), (tuple(eq),), inequations=("x",) if ineq else ())
    got = solve_bounded(s, 2)
    want = brute_free(s, 2)
    assert (got is None) == (want is None)
    if got is not None:
        assert got.key(s) == want.key(s) and verify_assignment(s, got)


def run(text, **kw):
    s = parse_system(text)
    return s, decide_system(s, **kw)


def test_decide_power_criterion():
    for p in (2, 3, 5, 7):
        s, v = run(f"generators a b\npi 2,3\nvars x\nx^{p} = a\n")
        assert v.status == (SOLVABLE if p in (2, 3) else UNSOLVABLE)
        if p in (2, 3):
            assert check_solution(s, v.group, v.witness)
            assert v.report() == ["RESULT solvable", "WITNESS x = t1", f"ROOT t1 = (a)^(1/{p})"]
        else:
            assert v.report() == ["RESULT unsolvable", f"REASON no root of degree {p}: exponent 1/{p} is not in Q_pi"]


def test_decide_examples():
    assert run("generators a b\npi 2\nvars x\nx a x^-1 = b\n")[1].status == UNSOLVABLE
    assert run("generators a b\npi 2\nvars x\nx^2 = 1\nx != 1\n")[1].status == UNSOLVABLE


def test_decide_unknown_names_budget():
    _, v = run("generators a b\npi 2\nvars x y\nx a y x b y = 1\n", max_candidates=200)
    assert v.status == UNKNOWN and v.budget == "max_candidates"
    assert "200" in v.reason


@pytest.mark.parametrize("name,text,truth", LIBRARY, ids=[x[0] for x in LIBRARY])
def test_library_soundness(name, text, truth):
    s, v = run(text, max_candidates=3000)
    assert v.status in (truth, UNKNOWN)
    if v.status == SOLVABLE:
        assert check_solution(s, v.group, v.witness)


def test_decide_deterministic():
    text = "generators a b\npi 2,3\nvars x y\nx^2 = y^3\nx != 1\n"
    assert run(text)[1].report() == run(text)[1].report()


def test_decide_pi_override():
    s = make_system("ab", "2", ["x"], [[("x", 3), ("a", -1)]])
    assert decide_system(s).status == UNSOLVABLE
    assert decide_system(s, pi=PiSet([3])).status == SOLVABLE
