"""Characteristic constraints, selective reduction, equation construction and
the conditional-symmetry test.

Two kinds of reduction live here and must not be confused.  :func:`reduce`
substitutes only the instances held in a :class:`ConstraintSet`; it is what
builds an equation out of invariants.  :func:`is_conditional_symmetry` instead
eliminates the characteristic and *every* differential consequence, which is
the verification step.  Using the full set while constructing collapses the
equation to an ODE (see :func:`full_reduction`).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Union

from .canonical import canonicalize, is_zero, simplify, to_string
from .expr import (
    Atom,
    Expr,
    Jet,
    MultiIndex,
    Num,
    add,
    jets,
    mul,
    power,
    substitute,
    substitute_many,
)
from .jet import (
    Eliminator,
    JetError,
    JetRanking,
    leading_variable,
    multi_total_derivative,
    solve_linear_for,
)
from .symmetry import (
    Equation,
    VectorField,
    apply,
    characteristic,
    is_invariant,
    is_point_symmetry,
    prolong,
)


class ReductionError(ValueError):
    pass


@dataclass(frozen=True)
class Instance:
    index: MultiIndex
    variable: Jet
    rhs: Expr

    def __str__(self) -> str:
        return f"[{self.index}] {self.variable.name()} = {to_string(self.rhs)}"


@dataclass(frozen=True)
class ConstraintSet:
    base: Expr
    instances: tuple[Instance, ...]
    ranking: JetRanking
    source: Optional[VectorField] = None

    def ordered(self) -> list[Instance]:
        """Instances by decreasing rank of their solved variable."""
        return sorted(self.instances, key=lambda inst: self.ranking.key(inst.variable), reverse=True)

    def variables(self) -> set[Jet]:
        return {inst.variable for inst in self.instances}


def ranking_for(field_: VectorField) -> JetRanking:
    """eliminate-y when eta is nonzero (gauge eta = 1), eliminate-x otherwise (xi = 1)."""
    return JetRanking("y") if not is_zero(field_.eta) else JetRanking("x")


def consequences(
    c: Expr,
    indices: Iterable[Union[MultiIndex, str]],
    ranking: JetRanking,
    overrides: Optional[Mapping[MultiIndex, Jet]] = None,
    source: Optional[VectorField] = None,
) -> ConstraintSet:
    """Solve D_J c = 0 for its leading variable for every requested J (the empty index always)."""
    overrides = dict(overrides or {})
    wanted = {MultiIndex()}
    for j in indices:
        wanted.add(j if isinstance(j, MultiIndex) else MultiIndex(j))
    out: list[Instance] = []
    for index in sorted(wanted, key=lambda m: (m.order, m.letters())):
        expr = multi_total_derivative(c, index)
        if not jets(expr):
            raise ReductionError(f"consequence {index} contains no jet variable")
        var = overrides.get(index) or leading_variable(expr, ranking)
        try:
            rhs = solve_linear_for(expr, var)
        except JetError as exc:
            raise ReductionError(f"consequence {index}: {exc}") from None
        if any(inst.variable == var for inst in out):
            raise ReductionError(f"rank collision: {var.name()} solved twice")
        out.append(Instance(index, var, rhs))
    cs = ConstraintSet(simplify(c), tuple(out), ranking, source)
    _check_triangular(cs)
    return cs


def _check_triangular(cs: ConstraintSet) -> None:
    key = cs.ranking.key
    solved = cs.variables()
    for inst in cs.instances:
        for j in jets(inst.rhs):
            if j in solved and key(j) >= key(inst.variable):
                raise ReductionError(
                    f"constraint set is not triangular: {inst.variable.name()} depends on {j.name()}")


def condition(field_: VectorField, indices: Iterable[Union[MultiIndex, str]] = (),
              overrides: Optional[Mapping[MultiIndex, Jet]] = None,
              ranking: Optional[JetRanking] = None) -> ConstraintSet:
    """Constraint set built from the characteristic of ``field_``."""
    return consequences(characteristic(field_), indices, ranking or ranking_for(field_), overrides, field_)


def full_condition(field_: VectorField, order: int) -> ConstraintSet:
    """The characteristic with every consequence needed to eliminate jets up to ``order``."""
    ranking = ranking_for(field_)
    letters = "xy"
    indices = [MultiIndex()]
    frontier = [MultiIndex()]
    for _ in range(order - 1):
        nxt = []
        for m in frontier:
            for v in letters:
                r = m.raised(v)
                if r not in indices:
                    indices.append(r)
                    nxt.append(r)
        frontier = nxt
    return condition(field_, indices, ranking=ranking)


def reduce(e: Expr, cs: ConstraintSet, protect: Sequence[Expr] = ()) -> Expr:
    """Substitute each instance of ``cs`` (decreasing rank) and canonicalize.

    Numerator monomials divisible by one of the ``protect`` monomials are left
    untouched by the substitution.
    """
    protect_terms = [_monomial(p) for p in protect]
    for inst in cs.ordered():
        if protect_terms:
            e = _guarded_substitute(e, inst.variable, inst.rhs, protect_terms)
        else:
            e = substitute(e, inst.variable, inst.rhs)
    return simplify(e)


def _monomial(p: Expr) -> dict[Expr, int]:
    cf = canonicalize(p)
    if len(cf.num) != 1 or not cf.is_polynomial:
        raise ReductionError(f"protected term {to_string(p)} is not a monomial")
    return cf.terms()[0][1]


def _guarded_substitute(e: Expr, var: Jet, rhs: Expr, protect: list[dict[Expr, int]]) -> Expr:
    cf = canonicalize(e)
    if var not in cf.kernels:
        return e
    parts = []
    for coeff, mono in cf.terms():
        term = mul(Num(coeff), *(power(k, n) for k, n in mono.items()))
        if var in mono and not any(all(mono.get(k, 0) >= n for k, n in p.items()) for p in protect):
            term = substitute(term, var, rhs)
        parts.append(term)
    num = add(*parts)
    den = substitute(cf.denominator().to_expr(), var, rhs)
    return mul(num, power(den, -1))


def full_reduction(e: Expr, field_: VectorField, order: Optional[int] = None) -> Expr:
    """Eliminate the characteristic and all of its consequences everywhere in e."""
    return condition_eliminator(field_).reduce(e)


def condition_eliminator(field_: VectorField) -> Eliminator:
    ranking = ranking_for(field_)
    c = characteristic(field_)
    var = Jet("u", ranking.eliminate)
    return Eliminator(var, solve_linear_for(c, var), ranking)


@dataclass(frozen=True)
class InvariantSet:
    entries: dict[str, Expr]
    field: Optional[VectorField] = None

    def check(self, field_: Optional[VectorField] = None) -> dict[str, bool]:
        f = field_ or self.field
        return {name: is_invariant(f, e) for name, e in self.entries.items()}

    def names(self) -> list[str]:
        return list(self.entries)


def expand_combination(combination: Expr, inv: InvariantSet) -> Expr:
    """Replace invariant-name atoms in ``combination`` by their expressions."""
    mapping = {Atom(name, "constant"): e for name, e in inv.entries.items()}
    unknown = {a.name for a in _atoms(combination)} - set(inv.entries) - {"x", "y"}
    if unknown:
        raise ReductionError(f"combination references unknown invariants: {sorted(unknown)}")
    return substitute_many(combination, mapping)


def _atoms(e: Expr):
    from .expr import atoms
    return [a for a in atoms(e) if a.kind == "constant"]


def clear_denominators(e: Expr, independent: Sequence[str] = ("x", "y")) -> Expr:
    """Multiply by the monomial in the independent variables making e polynomial in jets.

    When the denominator is not such a monomial the whole denominator is cleared.
    A common monomial factor of the numerator in the independent variables is
    divided out as well, so the result is minimal.
    """
    cf = canonicalize(e)
    if cf.is_zero:
        return e
    num = cf.numerator().to_expr()
    indep = [Atom(v) for v in independent]
    common = {}
    for a in indep:
        if a in cf.kernels:
            i = cf.kernels.index(a)
            common[a] = min(m[i] for m, _ in cf.num)
    factor = mul(*(power(a, n) for a, n in common.items() if n))
    return simplify(mul(num, power(factor, -1)))


def construct_equation(
    inv: InvariantSet,
    combination: Expr,
    cs: ConstraintSet,
    solve_hint: Jet,
    protect: Sequence[Expr] = (),
) -> Equation:
    """Build E = combination(invariants) reduced on the listed condition instances, solved for ``solve_hint``."""
    expr = expand_combination(combination, inv)
    reduced = reduce(expr, cs, protect)
    if is_zero(reduced):
        raise ReductionError("constructed equation vanishes identically")
    lhs = clear_denominators(reduced)
    try:
        return Equation.from_lhs(lhs, solve_hint)
    except JetError as exc:
        raise ReductionError(str(exc)) from None


def conditional_residual(field_: VectorField, eq: Equation) -> Expr:
    """pr X E reduced on C = 0 with all consequences and on E = 0 with its consequences."""
    elim_c = condition_eliminator(field_)
    reduced_eq = elim_c.reduce(eq.lhs)
    value = elim_c.reduce(apply(prolong(field_, eq.order), eq.lhs))
    if is_zero(reduced_eq):
        return value
    free = [j for j in jets(reduced_eq) if j.dependent == "u"]
    if not free:
        raise ReductionError("equation reduces to a relation free of u on the condition")
    lead = elim_c.ranking.leading(free)
    if lead.index.count(elim_c.ranking.eliminate):
        raise ReductionError("rank cycle between the equation and the condition")
    try:
        elim_e = Eliminator(lead, solve_linear_for(reduced_eq, lead), elim_c.ranking)
    except JetError as exc:
        raise ReductionError(f"cannot solve the reduced equation: {exc}") from None
    return elim_e.reduce(value)


def is_conditional_symmetry(field_: VectorField, eq: Equation) -> bool:
    return is_zero(conditional_residual(field_, eq))


@dataclass(frozen=True)
class SymmetryClassification:
    verdict: str
    factor: Optional[Expr] = None

    VERDICTS = ("point", "point-equivalent", "conditional-only", "none")

    def __post_init__(self):
        if self.verdict not in self.VERDICTS:
            raise ValueError(self.verdict)
        if (self.verdict == "point-equivalent") != (self.factor is not None):
            raise ValueError("point-equivalent verdicts carry exactly one factor")

    def __str__(self) -> str:
        if self.factor is not None:
            return f"{self.verdict}({to_string(self.factor)})"
        return self.verdict


def default_factors() -> list[Expr]:
    x, y = Atom("x"), Atom("y")
    out: list[Expr] = []
    seen = set()
    for a in range(-2, 3):
        for b in range(-2, 3):
            f = mul(power(x, a), power(y, b))
            out.append(f)
    for b in (-5, 7):
        out.append(power(y, b))
    ordered = []
    for f in sorted(out, key=lambda f: (_weight(f), to_string(f))):
        key = to_string(f)
        if key not in seen:
            seen.add(key)
            ordered.append(f)
    return ordered


def _weight(f: Expr) -> int:
    cf = canonicalize(f)
    return sum(sum(m) for m, _ in cf.num) + sum(sum(m) for m, _ in cf.den)


def classify(field_: VectorField, eq: Equation,
             candidate_factors: Optional[Sequence[Expr]] = None) -> SymmetryClassification:
    if is_point_symmetry(field_, eq):
        return SymmetryClassification("point")
    from .determining import check_candidate, determining_system

    factors = default_factors() if candidate_factors is None else candidate_factors
    system = None
    for f in factors:
        if is_zero(f) or is_zero(add(f, Num(-1))):
            continue
        # the determining system rejects most factors cheaply; hits are confirmed directly
        system = system or determining_system(eq)
        scaled = field_.scaled(f)
        if check_candidate(system, scaled) and is_point_symmetry(scaled, eq):
            return SymmetryClassification("point-equivalent", simplify(f))
    if is_conditional_symmetry(field_, eq):
        return SymmetryClassification("conditional-only")
    return SymmetryClassification("none")
