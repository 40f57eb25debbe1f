"""Problem files, the bundled corpus and per-entry verification.

A problem file is an INI document.  ``[problem]`` holds ``id``, ``tier``,
``note`` and optional ``field``/``equation`` references; ``[constants]`` names
the symbolic constants.  Every other section is either a definition
(``[field:NAME]``, ``[equation:NAME]``, ``[invariants]``/``[invariants:NAME]``)
or an assertion, run in file order:

    reconstruct, construct, conditional, point, classify, multiple, degenerate

References to fields and equations are local section names or paths relative
to the corpus root (``fields/X1``); the ``.ini`` suffix is optional.
"""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

from .canonical import is_zero, simplify, to_string
from .expr import Expr, add, jet_order, jets, mul, neg
from .jet import JetError, JetRanking
from .parser import ParseError, Workspace, parse, parse_index, parse_jet
from .reduction import (
    ConstraintSet,
    InvariantSet,
    ReductionError,
    SymmetryClassification,
    classify,
    condition,
    conditional_residual,
    construct_equation,
    expand_combination,
    full_reduction,
    reduce,
)
from .symmetry import (
    Equation,
    SymmetryError,
    VectorField,
    apply,
    is_multiple,
    point_residual,
    prolong,
)

CORPUS_ENV = "JETSYM_CORPUS"
TIERS = ("core", "extended", "partial")
ASSERTIONS = ("invariants", "reconstruct", "construct", "conditional", "point",
              "classify", "multiple", "degenerate")
DEFINITIONS = ("problem", "constants", "field", "equation")
ENGINE_ERRORS = (ReductionError, SymmetryError, JetError, ZeroDivisionError, ValueError)


class ProblemError(ValueError):
    pass


def corpus_root() -> Path:
    env = os.environ.get(CORPUS_ENV)
    if env:
        return Path(env)
    return Path(str(resources.files("jetsym") / "corpus"))


def resolve(ref: str, base: Optional[Path] = None) -> Path:
    """Find a file reference: as given, then under the corpus root; ``.ini`` optional."""
    ref = ref.strip()
    roots = [Path.cwd()] + ([base] if base else []) + [corpus_root()]
    for root in roots:
        for cand in (root / ref, root / (ref + ".ini")):
            if cand.is_file():
                return cand
    raise ProblemError(f"cannot find {ref!r} (corpus root {corpus_root()})")


def read_ini(path: Path) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ProblemError(f"{path}: {exc}") from None
    return cp


def _split(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def constants_of(cp: configparser.ConfigParser) -> tuple[str, ...]:
    if cp.has_section("constants"):
        return tuple(cp.get("constants", "names", fallback="").split())
    return ()


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1"):
        return True
    if t in ("false", "no", "0"):
        return False
    raise ProblemError(f"expected true/false, got {text!r}")


def field_from_section(sec: configparser.SectionProxy, ws: Workspace, name: str = "") -> VectorField:
    try:
        return VectorField(*(parse(sec.get(k, "0"), ws) for k in ("xi", "eta", "phi")),
                           name=sec.get("name", name))
    except (ParseError, SymmetryError) as exc:
        raise ProblemError(f"field {name or sec.name}: {exc}") from None


def equation_from_section(sec: configparser.SectionProxy, ws: Workspace, name: str = "") -> Equation:
    try:
        var = parse_jet(sec["solved"], ws)
        if "rhs" in sec:
            return Equation.from_solved(var, parse(sec["rhs"], ws), name)
        return Equation.from_lhs(parse(sec["lhs"], ws), var, name)
    except KeyError as exc:
        raise ProblemError(f"equation {name or sec.name}: missing key {exc}") from None
    except (ParseError, SymmetryError, JetError) as exc:
        raise ProblemError(f"equation {name or sec.name}: {exc}") from None


def load_field(ref: str, ws: Optional[Workspace] = None) -> VectorField:
    path = resolve(ref)
    cp = read_ini(path)
    ws = (ws or Workspace()).with_constants(constants_of(cp))
    return field_from_section(cp["field"], ws, path.stem)


def load_equation(ref: str, ws: Optional[Workspace] = None) -> Equation:
    path = resolve(ref)
    cp = read_ini(path)
    ws = (ws or Workspace()).with_constants(constants_of(cp))
    return equation_from_section(cp["equation"], ws, path.stem)


def load_invariants(ref: str, section: str = "invariants", ws: Optional[Workspace] = None) -> InvariantSet:
    path = resolve(ref)
    cp = read_ini(path)
    ws = (ws or Workspace()).with_constants(constants_of(cp))
    return InvariantSet({k: parse(v, ws) for k, v in cp[section].items() if k not in ("field", "fails")})


@dataclass
class AssertionResult:
    entry: str
    assertion: str
    status: str
    residual: str = ""
    detail: str = ""

    def as_dict(self) -> dict:
        return {"entry": self.entry, "assertion": self.assertion, "status": self.status,
                "residual": self.residual, "detail": self.detail}


@dataclass
class Problem:
    id: str
    tier: str
    note: str
    path: Path
    config: configparser.ConfigParser
    workspace: Workspace
    fields: dict[str, VectorField] = field(default_factory=dict)
    equations: dict[str, Equation] = field(default_factory=dict)
    invariants: dict[str, InvariantSet] = field(default_factory=dict)

    def assertions(self) -> list[str]:
        return [s for s in self.config.sections() if s.split(":")[0] in ASSERTIONS]

    def get_field(self, ref: Optional[str]) -> VectorField:
        ref = ref or "field"
        if ref in self.fields:
            return self.fields[ref]
        f = load_field(ref, self.workspace)
        self.fields[ref] = f
        return f

    def get_equation(self, ref: Optional[str]) -> Equation:
        ref = ref or "equation"
        if ref in self.equations:
            return self.equations[ref]
        e = load_equation(ref, self.workspace)
        self.equations[ref] = e
        return e

    def get_invariants(self, name: str = "") -> InvariantSet:
        key = f"invariants:{name}" if name else "invariants"
        try:
            return self.invariants[key]
        except KeyError:
            raise ProblemError(f"{self.id}: no invariant set {key!r}") from None

    def expr(self, text: str) -> Expr:
        return parse(text, self.workspace)


def load_problem(path: Path) -> Problem:
    cp = read_ini(path)
    if not cp.has_section("problem"):
        raise ProblemError(f"{path}: missing [problem] section")
    head = cp["problem"]
    tier = head.get("tier", "core")
    if tier not in TIERS:
        raise ProblemError(f"{path}: unknown tier {tier!r}")
    names = set(constants_of(cp))
    for key in ("field", "equation"):
        if key in head:
            names.update(constants_of(read_ini(resolve(head[key]))))
    ws = Workspace(constants=tuple(sorted(names)))
    prob = Problem(head.get("id", path.stem), tier, head.get("note", ""), path, cp, ws)
    for key in ("field", "equation"):
        if key in head:
            getter = prob.get_field if key == "field" else prob.get_equation
            obj = getter(head[key])
            (prob.fields if key == "field" else prob.equations)[key] = obj
    for sec in cp.sections():
        kind, _, name = sec.partition(":")
        if kind == "field":
            prob.fields[name or "field"] = field_from_section(cp[sec], ws, name)
        elif kind == "equation":
            prob.equations[name or "equation"] = equation_from_section(cp[sec], ws, name)
        elif kind == "invariants":
            entries = {k: v for k, v in cp[sec].items() if k not in ("field", "fails")}
            try:
                prob.invariants[sec] = InvariantSet({k: parse(v, ws) for k, v in entries.items()})
            except ParseError as exc:
                raise ProblemError(f"{prob.id} [{sec}]: {exc}") from None
        elif kind not in ASSERTIONS + DEFINITIONS:
            raise ProblemError(f"{prob.id}: unknown section [{sec}]")
    return prob


# -- assertions ---------------------------------------------------------------

def _constraint_set(prob: Problem, sec: configparser.SectionProxy) -> ConstraintSet:
    f = prob.get_field(sec.get("field"))
    indices = [parse_index(t) for t in _split(sec.get("instances", "-"))]
    overrides = {}
    for item in _split(sec.get("overrides", "")):
        idx, _, var = item.partition(":")
        overrides[parse_index(idx)] = parse_jet(var, prob.workspace)
    ranking = JetRanking.from_mode(sec["ranking"]) if "ranking" in sec else None
    return condition(f, indices, overrides, ranking)


def _outcome(ok: bool, expect: bool, residual: Expr) -> tuple[str, str]:
    status = "PASS" if ok == expect else "FAIL"
    return status, "" if is_zero(residual) else to_string(residual)


def _check_invariants(prob, sec):
    f = prob.get_field(sec.get("field"))
    inv = prob.invariants[sec.name]
    fails = set(_split(sec.get("fails", "")))
    bad, residual = [], ""
    for name, e in inv.entries.items():
        r = apply(prolong(f, jet_order(e)), e)
        holds = is_zero(r)
        if holds == (name in fails):
            bad.append(name)
            residual = residual or to_string(r)
    detail = f"failing as documented: {', '.join(sorted(fails))}" if fails else ""
    if bad:
        return "FAIL", residual, f"unexpected outcome for {', '.join(bad)}"
    return "PASS", "", detail


def _check_reconstruct(prob, sec):
    inv = prob.get_invariants(sec.get("invariants", ""))
    comb = expand_combination(parse(sec["combination"], prob.workspace.with_constants(inv.names())), inv)
    base = prob.expr(sec["expected"]) if "expected" in sec else prob.get_equation(sec.get("equation")).lhs
    target = mul(prob.expr(sec.get("factor", "1")), base)
    mode = sec.get("mode", "exact")
    if mode == "identity":
        residual = simplify(add(comb, neg(target)))
    elif mode == "full":
        f = prob.get_field(sec.get("field"))
        residual = full_reduction(add(comb, neg(target)), f)
    else:
        cs = _constraint_set(prob, sec)
        protect = [prob.expr(p) for p in _split(sec.get("protect", ""))]
        lhs = reduce(comb, cs, protect)
        rhs = reduce(target, cs, protect) if mode == "modulo" else target
        residual = simplify(add(lhs, neg(rhs)))
    return _outcome(is_zero(residual), _bool(sec.get("expect", "true")), residual) + ("",)


def _check_construct(prob, sec):
    inv = prob.get_invariants(sec.get("invariants", ""))
    comb = parse(sec["combination"], prob.workspace.with_constants(inv.names()))
    cs = _constraint_set(prob, sec)
    protect = [prob.expr(p) for p in _split(sec.get("protect", ""))]
    hint = parse_jet(sec.get("solve", "u_y"), prob.workspace)
    built = construct_equation(inv, comb, cs, hint, protect)
    expected = prob.get_equation(sec.get("expected"))
    if expected.solved_variable != built.solved_variable:
        raise ProblemError(f"{sec.name}: expected equation is solved for {expected.solved_variable.name()}")
    residual = simplify(add(built.solved_rhs, neg(expected.solved_rhs)))
    status, res = _outcome(is_zero(residual), _bool(sec.get("expect", "true")), residual)
    return status, res, f"built {built}"


def _check_conditional(prob, sec):
    f = prob.get_field(sec.get("field"))
    eq = prob.get_equation(sec.get("equation"))
    residual = conditional_residual(f, eq)
    return _outcome(is_zero(residual), _bool(sec.get("expect", "true")), residual) + ("",)


def _check_point(prob, sec):
    from .determining import check_candidate, determining_system
    f = prob.get_field(sec.get("field"))
    eq = prob.get_equation(sec.get("equation"))
    expect = _bool(sec.get("expect", "true"))
    residual = point_residual(f, eq)
    status, res = _outcome(is_zero(residual), expect, residual)
    detail = ""
    if _bool(sec.get("determining", "true")):
        agrees = check_candidate(determining_system(eq), f) == is_zero(residual)
        detail = "determining system agrees" if agrees else "determining system disagrees"
        if not agrees:
            status = "FAIL"
    return status, res, detail


def _parse_factors(prob, text: str):
    text = text.strip()
    if text in ("", "default"):
        return None
    if text == "none":
        return []
    return [prob.expr(t) for t in _split(text)]


def _check_classify(prob, sec):
    f = prob.get_field(sec.get("field"))
    eq = prob.get_equation(sec.get("equation"))
    got = classify(f, eq, _parse_factors(prob, sec.get("factors", "default")))
    factor = prob.expr(sec["factor"]) if "factor" in sec else None
    want = SymmetryClassification(sec["verdict"], simplify(factor) if factor is not None else None)
    ok = got.verdict == want.verdict and (
        factor is None or (got.factor is not None and is_zero(add(got.factor, neg(factor)))))
    return ("PASS" if ok else "FAIL"), "", f"verdict {got}"


def _check_multiple(prob, sec):
    z = prob.get_field(sec.get("field"))
    x = prob.get_field(sec.get("of"))
    got = is_multiple(z, x)
    want = sec.get("factor", "none").strip()
    if want == "none":
        ok = got is None
    else:
        ok = got is not None and is_zero(add(got, neg(prob.expr(want))))
    return ("PASS" if ok else "FAIL"), "", f"factor {to_string(got) if got is not None else 'none'}"


def _check_degenerate(prob, sec):
    f = prob.get_field(sec.get("field"))
    eq = prob.get_equation(sec.get("equation"))
    letter = sec.get("letter", "y")
    out = full_reduction(eq.lhs, f)
    left = sorted(j.name() for j in jets(out) if j.index.count(letter))
    detail = f"reduced form {to_string(out)}"
    return ("PASS" if not left else "FAIL"), ", ".join(left), detail


CHECKS: dict[str, Callable] = {
    "invariants": _check_invariants,
    "reconstruct": _check_reconstruct,
    "construct": _check_construct,
    "conditional": _check_conditional,
    "point": _check_point,
    "classify": _check_classify,
    "multiple": _check_multiple,
    "degenerate": _check_degenerate,
}


def corpus_verify(prob: Problem) -> list[AssertionResult]:
    """Run every assertion of one entry; results do not depend on other entries."""
    out = []
    for name in prob.assertions():
        sec = prob.config[name]
        kind = name.split(":")[0]
        try:
            status, residual, detail = CHECKS[kind](prob, sec)
        except ENGINE_ERRORS + (ProblemError, KeyError) as exc:
            reason = f"{type(exc).__name__}: {exc}"
            status = "SKIP" if prob.tier == "extended" else "FAIL"
            residual, detail = "", reason
        out.append(AssertionResult(prob.id, name, status, residual, detail))
    return out


def list_problems(root: Optional[Path] = None) -> list[Path]:
    root = root or corpus_root()
    return sorted((root / "problems").glob("*.ini"))


def load_corpus(root: Optional[Path] = None, tier: str = "all") -> list[Problem]:
    probs = [load_problem(p) for p in list_problems(root)]
    if tier != "all":
        probs = [p for p in probs if p.tier == tier]
    return sorted(probs, key=lambda p: p.id)


def format_report(results: list[AssertionResult]) -> str:
    rows = [("entry", "assertion", "status", "residual / detail")]
    for r in results:
        rows.append((r.entry, r.assertion, r.status, r.residual or r.detail))
    w0 = max(len(r[0]) for r in rows)
    w1 = max(len(r[1]) for r in rows)
    lines = [f"{a:<{w0}}  {b:<{w1}}  {c:<6}  {d}".rstrip() for a, b, c, d in rows]
    counts = {s: sum(r.status == s for r in results) for s in ("PASS", "FAIL", "SKIP")}
    lines.append(f"summary: {counts['PASS']} passed, {counts['FAIL']} failed, {counts['SKIP']} skipped")
    return "\n".join(lines)
