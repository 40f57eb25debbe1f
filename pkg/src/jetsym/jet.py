"""Total derivatives on the jet space, rankings, and solved-form elimination."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .canonical import canonicalize, is_zero, simplify
from .expr import (
    ZERO,
    Atom,
    Expr,
    Jet,
    MultiIndex,
    add,
    is_number,
    jets,
    mul,
    neg,
    partial_derivative,
    power,
    substitute,
    substitute_many,
)


class JetError(ValueError):
    """Raised when a jet-space operation is ill-posed (e.g. solving a nonlinear constraint)."""


def _var_name(v: Union[Atom, str]) -> str:
    if isinstance(v, Atom):
        if v.kind != "independent":
            raise JetError(f"{v.name} is not an independent variable")
        return v.name
    return v


def total_derivative(e: Expr, v: Union[Atom, str]) -> Expr:
    """D_v e = d_v e + sum over jet variables u_J of u_{J+v} * d e / d u_J."""
    name = _var_name(v)
    parts = [partial_derivative(e, Atom(name, "independent"))]
    for j in sorted(jets(e), key=lambda j: (j.dependent, j.order, j.index.letters())):
        dj = partial_derivative(e, j)
        if is_number(dj, 0):
            continue
        parts.append(mul(j.raised(name), dj))
    return add(*parts)


def multi_total_derivative(e: Expr, index: Union[MultiIndex, str]) -> Expr:
    """Compose total derivatives along ``index``; the result is canonicalized after each step."""
    index = index if isinstance(index, MultiIndex) else MultiIndex(index)
    for v in index.letters():
        e = simplify(total_derivative(e, v))
    return e


@dataclass(frozen=True)
class JetRanking:
    """Strict total order on jet variables.

    ``eliminate`` names the independent variable whose derivatives are ranked
    highest: any jet with a positive count in it outranks every jet without.
    Ties are broken by total order, then by the count in ``eliminate``.
    """

    eliminate: str = "y"

    @classmethod
    def from_mode(cls, mode: str) -> "JetRanking":
        if not mode.startswith("eliminate-"):
            raise ValueError(f"unknown ranking mode {mode!r}")
        return cls(mode.split("-", 1)[1])

    @property
    def mode(self) -> str:
        return f"eliminate-{self.eliminate}"

    def key(self, j: Jet) -> tuple:
        c = j.index.count(self.eliminate)
        return (j.dependent, c > 0, j.order, c, j.index.letters())

    def leading(self, candidates: Iterable[Jet]) -> Jet:
        return max(candidates, key=self.key)


def leading_variable(e: Expr, ranking: JetRanking) -> Jet:
    found = jets(canonicalize(e).to_expr())
    if not found:
        raise JetError("expression contains no jet variable")
    return ranking.leading(found)


def solve_linear_for(e: Expr, v: Jet) -> Expr:
    """Solve e = 0 for v, where e is affine in v with a nonvanishing coefficient."""
    e = simplify(e)
    if v not in jets(e):
        raise JetError(f"{v.name()} does not occur in the expression")
    coeff = simplify(partial_derivative(e, v))
    if is_zero(coeff):
        raise JetError(f"coefficient of {v.name()} vanishes identically")
    if not is_zero(partial_derivative(coeff, v)):
        raise JetError(f"expression is not linear in {v.name()}")
    rest = substitute(e, v, ZERO)
    return simplify(mul(neg(rest), power(coeff, -1)))


class Eliminator:
    """Reduce modulo a solved equation ``var = rhs`` and all of its differential consequences.

    Every jet u_J with J containing the index K of ``var`` is replaced by the
    reduced image of D_{J-K} rhs.  Termination needs every jet of ``rhs`` to rank
    strictly below ``var``; this is checked up front.
    """

    def __init__(self, var: Jet, rhs: Expr, ranking: Optional[JetRanking] = None,
                 independent: tuple[str, ...] = ("x", "y")):
        self.var = var
        self.rhs = simplify(rhs)
        self.independent = independent
        self.ranking = ranking or JetRanking(_dominant(var, independent))
        top = self.ranking.key(var)
        for j in jets(self.rhs):
            if j.dependent == var.dependent and self.ranking.key(j) >= top:
                raise JetError(
                    f"solved form for {var.name()} is not rank-decreasing: it contains {j.name()}")
        self._images: dict[Jet, Expr] = {var: self.rhs}

    def applies_to(self, j: Jet) -> bool:
        return j.dependent == self.var.dependent and self.var.index <= j.index

    def image(self, j: Jet) -> Expr:
        if j in self._images:
            return self._images[j]
        extra = j.index - self.var.index
        # differentiate the image one step below, along a letter of the excess
        v = extra.letters()[-1]
        below = Jet(j.dependent, j.index.lowered(v))
        out = self.reduce(total_derivative(self.image(below), v))
        self._images[j] = out
        return out

    def reduce(self, e: Expr) -> Expr:
        targets = [j for j in jets(e) if self.applies_to(j)]
        if not targets:
            return simplify(e)
        mapping = {j: self.image(j) for j in sorted(targets, key=self.ranking.key)}
        return simplify(substitute_many(e, mapping))


def _dominant(var: Jet, independent: tuple[str, ...]) -> str:
    if not var.index:
        return independent[-1]
    return max(independent, key=lambda v: (var.index.count(v), v))
