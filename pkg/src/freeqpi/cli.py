"""Command-line front end.

Commands: ``normalize``, ``pow``, ``solve``, ``reduce``, ``vn``.  Exit codes: 0 success
(or solvable), 1 unsolvable, 2 unknown, 3 error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import Optional, Sequence

from .eq_pipeline import (
    EquationSystem,
    RootDecl,
    SystemError_,
    Term,
    eliminate_coefficients,
    reduce_rank,
    triangularize,
    word_inverse,
)
from .free_core import AlphabetError
from .fg_solver import SOLVABLE, UNKNOWN, UNSOLVABLE, decide_system
from .pi_arith import PiSet, PiViolation
from .syntax import Comm, Gen, Mul, One, ParseError, Pow, parse_word, tokenize

EXIT_OK, EXIT_UNSOLVABLE, EXIT_UNKNOWN, EXIT_ERROR = 0, 1, 2, 3


class UndeclaredSymbol(ParseError):
    pass


def _terms(node, line: int) -> tuple:
    if isinstance(node, Gen):
        return (Term(node.name, Fraction(1)),)
    if isinstance(node, One):
        return ()
    if isinstance(node, Mul):
        return tuple(t for f in node.factors for t in _terms(f, line))
    if isinstance(node, Comm):
        x, y = _terms(node.left, line), _terms(node.right, line)
        return word_inverse(x) + word_inverse(y) + x + y
    if isinstance(node, Pow):
        inner = _terms(node.base, line)
        e = node.exp
        if len(inner) == 1:
            return (Term(inner[0].name, inner[0].exp * e),) if e else ()
        if e.denominator != 1:
            raise ParseError("fractional powers apply to single symbols; declare a root instead", line)
        unit = inner if e > 0 else word_inverse(inner)
        return unit * abs(e.numerator)
    raise TypeError(node)


def _exponents(node):
    if isinstance(node, Pow):
        yield node.exp
        yield from _exponents(node.base)
    elif isinstance(node, Mul):
        for f in node.factors:
            yield from _exponents(f)
    elif isinstance(node, Comm):
        yield from _exponents(node.left)
        yield from _exponents(node.right)


def _check_pi(node, pi: PiSet, line: int) -> None:
    for e in _exponents(node):
        if not pi.admits(e.denominator):
            raise PiViolation(f"{line}: exponent {e} has denominator outside Z_pi for pi = {{{pi}}}")


def _word(text: str, line: int, offset: int, pi: PiSet, known: set) -> tuple:
    try:
        node = parse_word(text, line)
    except ParseError as exc:
        raise ParseError(str(exc).split(": ", 1)[-1], line, exc.col + offset) from None
    _check_pi(node, pi, line)
    terms = _terms(node, line)
    for t in terms:
        if t.name not in known:
            col = next((c for k, v, c in tokenize(text) if k == "ident" and v == t.name), 0)
            raise UndeclaredSymbol(f"undeclared symbol {t.name!r}", line, col + offset)
    return terms


def parse_system(text: str, pi: Optional[PiSet] = None) -> EquationSystem:
    """Parse the system format; ``pi`` (from the command line) overrides a ``pi`` line.

    ``lhs = rhs`` with rhs other than ``1`` is read as ``lhs * rhs^-1 = 1``.
    """
    lines = text.splitlines()
    file_pi = None
    for ln in lines:
        parts = ln.split(None, 1)
        if parts and parts[0] == "pi":
            try:
                file_pi = PiSet.parse(parts[1] if len(parts) > 1 else "")
            except ValueError as exc:
                raise ParseError(f"bad pi line: {exc}") from None
    pi = pi if pi is not None else (file_pi or PiSet())
    gens: list = []
    variables: list = []
    eqs: list = []
    ineqs: list = []
    roots: list = []
    known: set = set()
    for no, raw in enumerate(lines, 1):
        ln = raw.split("#", 1)[0].rstrip()
        if not ln.strip():
            continue
        head = ln.split(None, 1)
        kw = head[0]
        rest = head[1] if len(head) > 1 else ""
        if kw in ("generators", "vars"):
            names = rest.split()
            if not names:
                raise ParseError(f"{kw} needs at least one name", no, len(ln) + 1)
            for n in names:
                if not n.isidentifier():
                    raise ParseError(f"bad name {n!r}", no, ln.index(n) + 1)
                if n in known:
                    raise ParseError(f"symbol declared twice: {n!r}", no, ln.index(n) + 1)
                known.add(n)
            (gens if kw == "generators" else variables).extend(names)
            continue
        if kw == "pi":
            continue
        if kw == "root":
            name, eq, body = rest.partition("=")
            name = name.strip()
            body = body.strip()
            if not eq or not name.isidentifier():
                raise ParseError("expected 'root NAME = (word)^(1/INT)'", no, 1)
            if not body.startswith("(") or ")^(1/" not in body or not body.endswith(")"):
                raise ParseError("expected '(word)^(1/INT)'", no, ln.index(body) + 1 if body else len(ln))
            inner, _, deg = body[1:].rpartition(")^(1/")
            try:
                s = int(deg[:-1])
            except ValueError:
                raise ParseError(f"bad root degree {deg[:-1]!r}", no, ln.rindex(deg) + 1) from None
            if s < 2 or not pi.admits(s):
                raise PiViolation(f"{no}: root degree {s} is not in Z_pi for pi = {{{pi}}}")
            base = _word(inner, no, ln.index(inner), pi, known)
            if name in known:
                raise ParseError(f"symbol declared twice: {name!r}", no, ln.index(name) + 1)
            roots.append(RootDecl(name, base, s))
            known.add(name)
            continue
        if "!=" in ln:
            lhs, _, rhs = ln.partition("!=")
            if rhs.strip() != "1" or not lhs.strip().isidentifier():
                raise ParseError("expected 'VAR != 1'", no, ln.index("!=") + 1)
            v = lhs.strip()
            if v not in variables:
                raise UndeclaredSymbol(f"undeclared variable {v!r}", no, ln.index(v) + 1)
            ineqs.append(v)
            continue
        if "=" not in ln:
            raise ParseError("expected an equation 'word = 1'", no, len(ln) + 1)
        lhs, _, rhs = ln.partition("=")
        left = _word(lhs, no, 0, pi, known)
        right = () if rhs.strip() == "1" else _word(rhs, no, len(lhs) + 1, pi, known)
        eqs.append(left + word_inverse(right))
    if not gens:
        raise ParseError("missing 'generators' line")
    return EquationSystem(tuple(gens), pi, tuple(variables), tuple(eqs), tuple(ineqs), tuple(roots))


# ---------------------------------------------------------------- commands


def _group(gens: Sequence[str], pi: PiSet):
    from .qgroup import QGroup

    return QGroup(gens, pi)


def _roots(group) -> list[str]:
    return ["ROOT " + line[len("root "):] for line in group.tower.describe()]


def cmd_normalize(args) -> tuple[int, list[str]]:
    G = _group(args.gens, args.pi)
    out = []
    for w in args.words:
        out.append(f"NF {w} = {G.element(w).format()}")
    return EXIT_OK, out + _roots(G)


def cmd_pow(args) -> tuple[int, list[str]]:
    G = _group(args.gens, args.pi)
    x = G.element(args.word)
    alpha = Fraction(args.exp)
    y = G.qexp(x, alpha)
    return EXIT_OK, [f"POW ({args.word})^({alpha}) = {y.format()}"] + _roots(G)


def _budgets(args) -> dict:
    return dict(max_len=args.max_len, max_rank=args.max_rank, max_depth=args.max_depth, lin_cap=args.lin_cap,
                max_candidates=args.max_candidates)


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _reduction_lines(system: EquationSystem, budgets: dict) -> list[str]:
    """Coefficient elimination, triangulation and the top-rank witness-driven reduction."""
    elim = eliminate_coefficients(system)
    tri = triangularize(elim.system)
    out = ["# coefficients in F"] + elim.system.to_text().splitlines()
    out += ["# triangular"] + tri.system.to_text().splitlines()
    verdict = decide_system(tri.system, **budgets)
    if verdict.status != SOLVABLE:
        out.append(f"# no witness ({verdict.status}); rank reduction not emitted")
        return out
    tw = verdict.group.tower
    top = max((x.tower.normal_form(x.word).rank for x in verdict.witness.values()), default=0)
    if top == 0:
        out.append("# witness lies in F; nothing to reduce")
        return out
    wit = {v: tw.normal_form(x.word) for v, x in verdict.witness.items()}
    red = reduce_rank(tri.system, tw, top, wit)
    out += ["# tower"] + tw.describe()
    out += [f"# rank {top} reduction"] + red.to_text().splitlines()
    out.append(f"# check {'ok' if red.check(tw, red.values) else 'FAILED'}")
    return out


def cmd_solve(args) -> tuple[int, list[str]]:
    system = parse_system(_read(args.file), args.pi)
    verdict = decide_system(system, **_budgets(args))
    if args.emit_reduction:
        with open(args.emit_reduction, "w", encoding="utf-8") as fh:
            fh.write("\n".join(_reduction_lines(system, _budgets(args))) + "\n")
    code = {SOLVABLE: EXIT_OK, UNSOLVABLE: EXIT_UNSOLVABLE, UNKNOWN: EXIT_UNKNOWN}[verdict.status]
    return code, verdict.report()


def cmd_reduce(args) -> tuple[int, list[str]]:
    system = parse_system(_read(args.file), args.pi)
    return EXIT_OK, _reduction_lines(system, _budgets(args))


def cmd_vn(args) -> tuple[int, list[str]]:
    from .tower import Tower, select_vn

    tw = Tower(args.gens, args.pi)
    return EXIT_OK, [" ".join(tw.format(x) for x in select_vn(tw, args.pi, args.n))]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"error: {message}\n")


def _pi(text: str) -> PiSet:
    try:
        return PiSet.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _gens(text: str) -> list[str]:
    return [g for g in text.replace(",", " ").split() if g]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="freeqpi", description="Equations over free Q_pi-groups.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(q, pi_default=None):
        q.add_argument("--pi", type=_pi, default=pi_default, help="comma-separated primes, e.g. 2,3")

    def budgets(q):
        q.add_argument("--max-len", type=int, default=8)
        q.add_argument("--max-rank", type=int, default=2)
        q.add_argument("--max-depth", type=int, default=6)
        q.add_argument("--lin-cap", type=int, default=20)
        q.add_argument("--max-candidates", type=int, default=20000)

    q = sub.add_parser("normalize", help="print normal forms of words")
    common(q, PiSet())
    q.add_argument("--gens", type=_gens, default=["a", "b"])
    q.add_argument("words", nargs="+")
    q.set_defaults(func=cmd_normalize)

    q = sub.add_parser("pow", help="rational power of a word")
    common(q, PiSet())
    q.add_argument("--gens", type=_gens, default=["a", "b"])
    q.add_argument("word")
    q.add_argument("exp", help="exponent such as 3/2")
    q.set_defaults(func=cmd_pow)

    q = sub.add_parser("solve", help="decide a system")
    common(q)
    budgets(q)
    q.add_argument("--emit-reduction", metavar="PATH")
    q.add_argument("file")
    q.set_defaults(func=cmd_solve)

    q = sub.add_parser("reduce", help="print the transformed systems")
    common(q)
    budgets(q)
    q.add_argument("file")
    q.set_defaults(func=cmd_reduce)

    q = sub.add_parser("vn", help="print the V_n selection")
    common(q, PiSet())
    q.add_argument("--gens", type=_gens, default=["a", "b"])
    q.add_argument("--n", type=int, default=2)
    q.set_defaults(func=cmd_vn)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code, lines = args.func(args)
    except AlphabetError as exc:
        print(f"error: unknown letter {exc.args[0]!r}", file=sys.stderr)
        return EXIT_ERROR
    except (ParseError, PiViolation, SystemError_, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for line in lines:
        print(line)
    return code


if __name__ == "__main__":
    sys.exit(main())
