"""Point vector fields, their prolongations, characteristics and invariance tests."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Optional

from .canonical import is_zero, simplify, to_string
from .expr import (
    Atom,
    Expr,
    Jet,
    MultiIndex,
    add,
    as_expr,
    jet_order,
    jets,
    mul,
    neg,
    partial_derivative,
    power,
    substitute,
)
from .jet import Eliminator, JetError, solve_linear_for, total_derivative

X = Atom("x")
Y = Atom("y")
U = Jet("u")


class SymmetryError(ValueError):
    pass


@dataclass(frozen=True)
class VectorField:
    """xi d_x + eta d_y + phi d_u with coefficients depending on (x, y, u) only."""

    xi: Expr
    eta: Expr
    phi: Expr
    name: str = field(default="", compare=False)

    def __post_init__(self):
        for c in (self.xi, self.eta, self.phi):
            if any(j.order > 0 for j in jets(c)):
                raise SymmetryError("point field coefficients may not depend on derivatives of u")
        if all(is_zero(c) for c in (self.xi, self.eta, self.phi)):
            raise SymmetryError("vector field is identically zero")

    @classmethod
    def of(cls, xi, eta, phi, name: str = "") -> "VectorField":
        return cls(as_expr(xi), as_expr(eta), as_expr(phi), name)

    def components(self) -> tuple[Expr, Expr, Expr]:
        return (self.xi, self.eta, self.phi)

    def scaled(self, f: Expr, name: str = "") -> "VectorField":
        return VectorField(*(simplify(mul(as_expr(f), c)) for c in self.components()), name=name)

    def normalized(self) -> "VectorField":
        """Divide by eta (if nonzero) or else by xi, the usual gauge for conditional symmetries."""
        lead = self.eta if not is_zero(self.eta) else self.xi
        if is_zero(lead):
            raise SymmetryError("field has no x or y component to normalize by")
        return self.scaled(power(lead, -1), self.name)

    def __str__(self) -> str:
        return (f"({to_string(self.xi)})*d_x + ({to_string(self.eta)})*d_y"
                f" + ({to_string(self.phi)})*d_u")


@dataclass(frozen=True)
class ProlongedField:
    base: VectorField
    order: int
    coefficients: dict[MultiIndex, Expr]

    def coefficient(self, index: MultiIndex) -> Expr:
        if not index:
            return self.base.phi
        try:
            return self.coefficients[index]
        except KeyError:
            raise SymmetryError(f"prolongation of order {self.order} has no coefficient for u_{index}") from None


def _indices(order: int, letters=("x", "y")):
    for n in range(1, order + 1):
        for combo in combinations_with_replacement(letters, n):
            yield MultiIndex("".join(combo))


def prolong(field_: VectorField, n: int) -> ProlongedField:
    """Coefficients phi^J for 1 <= |J| <= n by phi^{J+i} = D_i phi^J - u_{J+x} D_i xi - u_{J+y} D_i eta."""
    if n < 0:
        raise ValueError("prolongation order must be non-negative")
    d_xi = {v: simplify(total_derivative(field_.xi, v)) for v in "xy"}
    d_eta = {v: simplify(total_derivative(field_.eta, v)) for v in "xy"}
    coeffs: dict[MultiIndex, Expr] = {}
    for index in _indices(n):
        letters = index.letters()
        i = letters[-1]
        parent = index.lowered(i)
        prev = field_.phi if not parent else coeffs[parent]
        value = add(
            total_derivative(prev, i),
            neg(mul(Jet("u", parent.raised("x")), d_xi[i])),
            neg(mul(Jet("u", parent.raised("y")), d_eta[i])),
        )
        coeffs[index] = simplify(value)
    return ProlongedField(field_, n, coeffs)


def apply(pr: ProlongedField, e: Expr) -> Expr:
    """pr X applied to e: xi e_x + eta e_y + phi e_u + sum_J phi^J e_{u_J}."""
    need = jet_order(e)
    if need > pr.order:
        raise SymmetryError(f"expression has order {need} but the field is prolonged to {pr.order}")
    parts = [
        mul(pr.base.xi, partial_derivative(e, X)),
        mul(pr.base.eta, partial_derivative(e, Y)),
    ]
    for j in jets(e):
        if j.dependent != "u":
            continue
        parts.append(mul(pr.coefficient(j.index), partial_derivative(e, j)))
    return simplify(add(*parts))


def characteristic(field_: VectorField) -> Expr:
    """xi u_x + eta u_y - phi."""
    return simplify(add(mul(field_.xi, Jet("u", "x")), mul(field_.eta, Jet("u", "y")), neg(field_.phi)))


def is_invariant(field_: VectorField, e: Expr) -> bool:
    return is_zero(apply(prolong(field_, jet_order(e)), e))


@dataclass(frozen=True)
class Equation:
    """lhs = 0, kept together with a solved form ``solved_variable = solved_rhs``."""

    lhs: Expr
    solved_variable: Jet
    solved_rhs: Expr
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if not is_zero(substitute(self.lhs, self.solved_variable, self.solved_rhs)):
            raise SymmetryError("solved form does not satisfy the equation")

    @classmethod
    def from_lhs(cls, lhs: Expr, variable: Jet, name: str = "") -> "Equation":
        lhs = simplify(lhs)
        return cls(lhs, variable, solve_linear_for(lhs, variable), name)

    @classmethod
    def from_solved(cls, variable: Jet, rhs: Expr, name: str = "") -> "Equation":
        return cls(simplify(add(variable, neg(rhs))), variable, simplify(rhs), name)

    @property
    def order(self) -> int:
        return jet_order(self.lhs)

    def eliminator(self) -> Eliminator:
        try:
            return Eliminator(self.solved_variable, self.solved_rhs)
        except JetError as exc:
            raise SymmetryError(str(exc)) from None

    def __str__(self) -> str:
        return f"{self.solved_variable.name()} = {to_string(self.solved_rhs)}"


def is_point_symmetry(field_: VectorField, eq: Equation) -> bool:
    """pr X E restricted to E = 0 (solved variable and all its derivatives eliminated)."""
    return is_zero(point_residual(field_, eq))


def point_residual(field_: VectorField, eq: Equation) -> Expr:
    value = apply(prolong(field_, eq.order), eq.lhs)
    return eq.eliminator().reduce(value)


def is_multiple(z: VectorField, x: VectorField) -> Optional[Expr]:
    """The factor f with z = f*x componentwise, or None."""
    ratio = None
    for zc, xc in zip(z.components(), x.components()):
        if not is_zero(xc):
            ratio = simplify(mul(zc, power(xc, -1)))
            break
    if ratio is None:
        return None
    if any(jets(ratio) - {U}):
        return None
    for zc, xc in zip(z.components(), x.components()):
        if not is_zero(add(zc, neg(mul(ratio, xc)))):
            return None
    return ratio
