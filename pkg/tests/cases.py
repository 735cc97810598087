"""Small systems shared by the bijection tests and the acceptance suite."""

from fractions import Fraction as Fr

from brute import _term_values, elements, emitted_solutions, solutions
from freeqpi.eq_pipeline import (check_solution, eliminate_coefficients, is_triangular,
                                 make_system, reduce_rank, triangularize)
from freeqpi.qgroup import QElement, QGroup
from freeqpi.syntax import parse_word

# (pi, variables, equations, inequations, extra roots to adjoin, max word length)
CASES = [
    ("2", "x", ["x a^(-1/2)"], "", [], 3),
    ("2,3", "x", ["x b^(-1/3) a^(-3/2)"], "", [], 4),
    ("2", "x", ["x a^-1"], "", [], 3),
    ("2", "x y", ["x y a^-1"], "", ["a^(1/2)"], 3),
    ("2", "x y z w", ["x y z w"], "", [], 2),
    ("2", "x", ["x a x b x a^-1 b^-1"], "", ["a^(1/2)"], 3),
    ("2", "x", ["x x a^-1"], "", ["a^(1/2)"], 3),
    ("2", "x y", ["x x y^-1", "y a^-3"], "", ["a^(1/2)"], 3),
    ("2", "x", ["x a x^-1 a^-1"], "x", ["a^(1/2)"], 3),
    ("3", "x", ["x x x b^-1"], "", ["b^(1/3)"], 3),
    ("2", "x y", ["x y a^-1", "x x a^-1"], "", ["a^(1/2)"], 3),
    ("2", "x y", ["x y (a b)^(-1/2) b^-1"], "", [], 2),
    ("2", "x", ["x b^(-1/2) a^(-1/2)"], "", [], 3),
    ("2", "x", ["x x a^(-1/2)"], "", ["a^(1/4)"], 2),
    ("2", "x y", ["x x y y"], "y", ["a^(1/2)"], 2),
    ("2", "x", ["x a x^-1 b^-1"], "", [], 2),
    ("2,3", "x", ["x^6 a^-3"], "", ["a^(1/2)"], 3),
    ("2", "x y", ["x y x^-1 a^(-1/2)"], "y", [], 2),
    ("2,3", "x y", ["x^3 y^-2"], "y", ["a^(1/2)"], 3),
    ("2", "x y", ["x^-1 y^-1 x y", "x x a^-1"], "y", ["a^(1/2)"], 2),
    ("3", "x", ["x a (a b)^(-1/3)"], "", [], 3),
    ("2", "x y", ["x b x^-1 y^-1", "y y b^-2"], "", ["b^(1/2)"], 2),
]


def _word(text):
    node = parse_word(text)
    out = []

    def walk(n):
        kind = type(n).__name__
        if kind == "Gen":
            out.append((n.name, 1))
        elif kind == "Pow":
            assert type(n.base).__name__ == "Gen" or all(type(f).__name__ == "Gen" for f in n.base.factors)
            if type(n.base).__name__ == "Gen":
                out.append((n.base.name, Fr(n.exp)))
            else:
                out.append(("(" + " ".join(f.name for f in n.base.factors) + ")", Fr(n.exp)))
        else:
            for f in n.factors:
                walk(f)

    walk(node)
    return out


def build(case):
    """The system and its group (with the extra roots adjoined)."""
    pi, variables, eqs, ineq, roots, L = case
    G = QGroup("ab", pi)
    for r in roots:
        G.element(r)
    eqs = [_word(e) for e in eqs]
    # a compound base like (a b)^(1/2) becomes a declared root
    from freeqpi.eq_pipeline import RootDecl, Term
    decls, out = {}, []
    for eq in eqs:
        terms = []
        for name, e in eq:
            if name.startswith("("):
                base = tuple(Term(g, Fr(1)) for g in name[1:-1].split())
                key = name
                if key not in decls:
                    decls[key] = RootDecl(f"r{len(decls) + 1}", base, Fr(e).denominator)
                r = decls[key]
                terms.append((r.name, Fr(e) * r.degree))
            else:
                terms.append((name, e))
        out.append(terms)
    S = make_system("ab", pi, variables.split(), out, inequations=ineq.split(), roots=list(decls.values()))
    return S, G, L


def _q(G, vals):
    return {k: QElement(G, G.tower, v) for k, v in vals.items()}


def check_transform(tr, G, D):
    """Solutions before and after ``tr`` correspond under project/extend; returns the counts."""
    tw = G.tower
    src = solutions(tr.source, G, D)
    dst = solutions(tr.system, G, D)
    assert G.tower is tw
    dom = set(D)
    src_keys = {tuple(sorted(s.items())) for s in src}
    for s2 in dst:
        p = tr.project(s2)
        assert tuple(sorted(p.items())) in src_keys
        ext = {k: v.word for k, v in tr.extend(_q(G, p), G).items()}
        assert ext == s2
    dst_keys = {tuple(sorted(s.items())) for s in dst}
    for s in src:
        ext = tr.extend(_q(G, s), G)
        assert check_solution(tr.system, G, ext)
        words = {k: v.word for k, v in ext.items()}
        if all(v in dom for v in words.values()):
            assert tuple(sorted(words.items())) in dst_keys
    return len(src), len(dst)


def check_reduction(S, G, D, budget=200000):
    """Witness-driven reduction at the top rank for every solution; brute-forces small shapes."""
    tw = G.tower
    j = tw.rank
    assert is_triangular(S)
    sols = solutions(S, G, D)
    shapes = {}
    for s in sols:
        if not any(v.rank == j for v in s.values()):
            continue
        red = reduce_rank(S, tw, j, s)
        assert red.check(tw, red.values)
        assert red.reconstruct(tw, red.values) == s
        shapes.setdefault(red.to_text(), (red, []))[1].append((s, red.values))
    checked = 0
    low = elements(tw, 3, below=j)
    ints = range(-4, 5)
    for red, members in shapes.values():
        h = len((red.symbols() - set(red.t_powers)) | set(red.kept))
        i = len(red.int_symbols())
        if len(low) ** h * len(ints) ** i > budget:
            continue
        found = set()
        for vals in emitted_solutions(red, tw, low, ints):
            x = red.reconstruct(tw, vals)
            assert check_solution(S, G, _q(G, x)), (red.to_text(), {k: tw.format(v) for k, v in x.items()}, vals)
            found.add(tuple(sorted(x.items())))
        for s, v in members:
            if all(v[k] in low for k in (red.symbols() - set(red.t_powers)) | set(red.kept)) and all(
                v[k] in ints for k in red.int_symbols()
            ):
                assert tuple(sorted(s.items())) in found
        checked += 1
    return len(sols), len(shapes), checked


def run_case(case):
    S, G, L = build(case)
    # adjoin any coefficient roots before fixing the domain
    _term_values(S, G)
    D = elements(G.tower, L)
    e = eliminate_coefficients(S)
    n1 = check_transform(e, G, D)
    t = triangularize(e.system)
    n2 = check_transform(t, G, D)
    n3 = check_reduction(t.system, G, D) if G.tower.rank else (0, 0, 0)
    return n1, n2, n3
