"""Command-line front end.

Exit status: 0 when every check passes, 1 when a check fails, 2 on usage or
parse errors.  Expression arguments accept ``@path`` to read the text from a
file (resolved like every other reference, so ``@expr/bsq-X1-comb`` works).
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import corpus as corpus_mod
from .canonical import is_zero, to_string
from .determining import Ansatz, check_candidate, determining_system, failing_equations
from .expr import jet_order
from .jet import JetError, JetRanking
from .parser import ParseError, Workspace, parse, parse_index, parse_jet
from .reduction import (
    ReductionError,
    classify,
    condition,
    conditional_residual,
    construct_equation,
    full_reduction,
    reduce,
)
from .symmetry import (
    Equation,
    SymmetryError,
    VectorField,
    apply,
    point_residual,
    prolong,
)

OK, FAILED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _text(arg: str) -> str:
    if arg.startswith("@"):
        path = corpus_mod.resolve(arg[1:])
        return " ".join(path.read_text(encoding="utf-8").split())
    return arg


def _workspace(args) -> Workspace:
    names = tuple(n for n in (getattr(args, "constants", "") or "").replace(",", " ").split())
    return Workspace(constants=names)


def _field(args, ws: Workspace, attr: str = "field") -> VectorField:
    ref = getattr(args, attr, None)
    if ref:
        return corpus_mod.load_field(ref, ws)
    if args.xi is None and args.eta is None and args.phi is None:
        raise UsageError(f"give --{attr.replace('_', '-')} or --xi/--eta/--phi")
    return VectorField(*(parse(_text(v or "0"), ws) for v in (args.xi, args.eta, args.phi)))


def _equation(args, ws: Workspace) -> Equation:
    if args.equation:
        return corpus_mod.load_equation(args.equation, ws)
    if not args.lhs or not args.solved:
        raise UsageError("give --equation or both --lhs and --solved")
    return Equation.from_lhs(parse(_text(args.lhs), ws), parse_jet(args.solved, ws))


def _verdict(ok: bool, residual) -> int:
    if ok:
        print("PASS")
        return OK
    print(f"FAIL residual: {to_string(residual)}")
    return FAILED


def cmd_prolong(args) -> int:
    ws = _workspace(args)
    pr = prolong(_field(args, ws), args.order)
    for index, value in pr.coefficients.items():
        print(f"phi^{index}: {to_string(value)}")
    return OK


def cmd_check_invariant(args) -> int:
    ws = _workspace(args)
    f = _field(args, ws)
    e = parse(_text(args.expr), ws)
    r = apply(prolong(f, jet_order(e)), e)
    return _verdict(is_zero(r), r)


def cmd_check_point(args) -> int:
    ws = _workspace(args)
    r = point_residual(_field(args, ws), _equation(args, ws))
    return _verdict(is_zero(r), r)


def cmd_check_conditional(args) -> int:
    ws = _workspace(args)
    r = conditional_residual(_field(args, ws), _equation(args, ws))
    return _verdict(is_zero(r), r)


def cmd_classify(args) -> int:
    ws = _workspace(args)
    factors = None
    if args.factors is not None:
        factors = [parse(t, ws) for t in args.factors.split(",") if t.strip()]
    print(classify(_field(args, ws), _equation(args, ws), factors))
    return OK


def _constraints(args, ws):
    f = corpus_mod.load_field(args.condition_of, ws)
    indices = [parse_index(t) for t in (args.instances or "").split(",") if t.strip()]
    overrides = {}
    for item in (args.override or []):
        idx, _, var = item.partition(":")
        overrides[parse_index(idx)] = parse_jet(var, ws)
    ranking = JetRanking.from_mode(args.ranking) if args.ranking else None
    return f, condition(f, indices, overrides, ranking)


def cmd_reduce(args) -> int:
    ws = _workspace(args)
    e = parse(_text(args.expr), ws)
    if args.full:
        print(to_string(full_reduction(e, corpus_mod.load_field(args.condition_of, ws))))
        return OK
    _, cs = _constraints(args, ws)
    protect = [parse(p, ws) for p in (args.protect or [])]
    print(to_string(reduce(e, cs, protect)))
    return OK


def cmd_construct(args) -> int:
    ws = _workspace(args)
    path = corpus_mod.resolve(args.invariants)
    cp = corpus_mod.read_ini(path)
    ws = ws.with_constants(corpus_mod.constants_of(cp))
    section = f"invariants:{args.set}" if args.set else "invariants"
    inv = corpus_mod.load_invariants(str(path), section, ws)
    comb = parse(_text(args.combination), ws.with_constants(inv.names()))
    _, cs = _constraints(args, ws)
    protect = [parse(p, ws) for p in (args.protect or [])]
    eq = construct_equation(inv, comb, cs, parse_jet(args.solve, ws), protect)
    print(eq)
    return OK


def cmd_determining(args) -> int:
    ws = _workspace(args)
    eq = _equation(args, ws)
    system = determining_system(eq, Ansatz(args.conditional, args.gauge))
    print(system.report())
    if args.check:
        f = corpus_mod.load_field(args.check, ws)
        if check_candidate(system, f):
            print("PASS")
            return OK
        for d, r in failing_equations(system, f):
            print(f"FAIL {d.key()}: {to_string(r)}")
        return FAILED
    return OK


def cmd_corpus(args) -> int:
    root = corpus_mod.corpus_root()
    if args.action == "list":
        for p in corpus_mod.load_corpus(root, args.tier):
            print(f"{p.id}\t{p.tier}\t{len(p.assertions())} assertions\t{p.note}".rstrip())
        return OK
    probs = corpus_mod.load_corpus(root, args.tier)
    if args.entry:
        probs = [p for p in probs if p.id in set(args.entry)]
        if not probs:
            raise UsageError(f"no entry named {', '.join(args.entry)}")
    results = []
    for p in probs:
        results.extend(corpus_mod.corpus_verify(p))
    if args.json:
        counts = {s: sum(r.status == s for r in results) for s in ("PASS", "FAIL", "SKIP")}
        doc = {"results": [r.as_dict() for r in results], "summary": counts}
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        print(corpus_mod.format_report(results))
    return FAILED if any(r.status == "FAIL" for r in results) else OK


def _add_field_args(p):
    p.add_argument("--field", help="field file (e.g. fields/X1)")
    p.add_argument("--xi")
    p.add_argument("--eta")
    p.add_argument("--phi")


def _add_equation_args(p):
    p.add_argument("--equation", help="equation file (e.g. equations/boussinesq)")
    p.add_argument("--lhs", help="left-hand side of lhs = 0")
    p.add_argument("--solved", help="jet variable to solve for, e.g. u_xxxx")


def _add_constraint_args(p):
    p.add_argument("--condition-of", required=True, help="field whose characteristic is imposed")
    p.add_argument("--instances", default="", help="comma-separated multi-indices, e.g. 'x,xx'")
    p.add_argument("--override", action="append", help="solve an instance for a chosen jet, e.g. '-:u_x'")
    p.add_argument("--protect", action="append", help="monomial left untouched, e.g. 'u*u_x'")
    p.add_argument("--ranking", choices=["eliminate-x", "eliminate-y"])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jetsym", description="Jet-space symmetry checks.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--constants", default="", help="comma-separated constant names")
    sub = ap.add_subparsers(dest="command", required=True)

    def command(name: str, **kw) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], **kw)

    p = command("prolong", help="print prolongation coefficients")
    _add_field_args(p)
    p.add_argument("--order", type=int, default=1)
    p.set_defaults(run=cmd_prolong)

    p = command("check-invariant", help="is an expression invariant under a field")
    _add_field_args(p)
    p.add_argument("--expr", required=True)
    p.set_defaults(run=cmd_check_invariant)

    for name, fn in (("check-point", cmd_check_point), ("check-conditional", cmd_check_conditional)):
        p = command(name)
        _add_field_args(p)
        _add_equation_args(p)
        p.set_defaults(run=fn)

    p = command("classify")
    _add_field_args(p)
    _add_equation_args(p)
    p.add_argument("--factors", help="comma-separated candidate factors (default family if omitted)")
    p.set_defaults(run=cmd_classify)

    p = command("reduce", help="reduce an expression on the listed condition instances")
    p.add_argument("--expr", required=True)
    _add_constraint_args(p)
    p.add_argument("--full", action="store_true", help="use every differential consequence")
    p.set_defaults(run=cmd_reduce)

    p = command("construct", help="build an equation from invariants")
    p.add_argument("--invariants", required=True, help="problem file holding an [invariants] section")
    p.add_argument("--set", default="", help="name of an [invariants:NAME] section")
    p.add_argument("--combination", required=True)
    p.add_argument("--solve", default="u_y")
    _add_constraint_args(p)
    p.set_defaults(run=cmd_construct)

    p = command("determining", help="print the determining system")
    _add_equation_args(p)
    p.add_argument("--conditional", action="store_true")
    p.add_argument("--gauge", choices=["eta", "xi"], default="eta")
    p.add_argument("--check", help="field to test against the system")
    p.set_defaults(run=cmd_determining)

    p = command("corpus", help="list or run the problem corpus")
    p.add_argument("action", choices=["run", "list"])
    p.add_argument("--tier", choices=["all", *corpus_mod.TIERS], default="all")
    p.add_argument("--entry", action="append", help="run only these entry ids")
    p.add_argument("--json", action="store_true")
    p.set_defaults(run=cmd_corpus)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    try:
        return args.run(args)
    except (UsageError, ParseError, corpus_mod.ProblemError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except (ReductionError, SymmetryError, JetError, ZeroDivisionError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return FAILED


if __name__ == "__main__":
    sys.exit(main())
