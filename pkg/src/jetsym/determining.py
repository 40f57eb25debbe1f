"""Determining equations for a symmetry ansatz and candidate checks against them.

The unknown coefficients are undetermined functions of (x, y, u) represented
by :class:`~jetsym.expr.Fn` atoms, so ``xi_xu`` is the mixed partial of xi.
After the restriction to the equation (and, in conditional mode, to the
characteristic) the numerator is a polynomial in the jet variables of order at
least one; its coefficients are the determining equations.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

from .canonical import canonicalize, is_zero, kernel_key, simplify, to_string
from .expr import (
    ONE,
    ZERO,
    Atom,
    Expr,
    Fn,
    Jet,
    Num,
    add,
    jets,
    mul,
    partial_derivative,
    power,
    substitute_many,
    walk,
)
from .reduction import conditional_residual
from .symmetry import Equation, VectorField, point_residual

GAUGES = ("eta", "xi")


@dataclass(frozen=True)
class Ansatz:
    """Unknown coefficients; in conditional mode one of them is fixed by a gauge."""

    conditional: bool = False
    gauge: str = "eta"

    def __post_init__(self):
        if self.gauge not in GAUGES:
            raise ValueError(f"gauge must be one of {GAUGES}")

    def field(self) -> VectorField:
        xi, eta, phi = Fn("xi"), Fn("eta"), Fn("phi")
        if self.conditional:
            if self.gauge == "eta":
                eta = ONE
            else:
                xi, eta = ONE, ZERO
        return VectorField(xi, eta, phi, "ansatz")

    def normalize(self, field_: VectorField) -> VectorField:
        """Bring a concrete field into this ansatz's gauge."""
        if not self.conditional:
            return field_
        if self.gauge == "eta":
            if is_zero(field_.eta):
                raise ValueError("field has no d_y component; it does not fit the eta = 1 gauge")
            return field_.scaled(power(field_.eta, -1))
        if not is_zero(field_.eta):
            raise ValueError("field has a d_y component; it does not fit the xi = 1, eta = 0 gauge")
        return field_.scaled(power(field_.xi, -1))


@dataclass(frozen=True)
class DeterminingEquation:
    monomial: tuple[tuple[Expr, int], ...]
    expr: Expr

    def key(self) -> str:
        if not self.monomial:
            return "1"
        return "*".join(k_name(k) + (f"^{n}" if n != 1 else "") for k, n in self.monomial)

    def __str__(self) -> str:
        return f"{self.key()}: {to_string(self.expr)} = 0"


def k_name(k: Expr) -> str:
    return k.name() if isinstance(k, Jet) else to_string(k)


@dataclass(frozen=True)
class DeterminingSystem:
    equation: Equation
    ansatz: Ansatz
    equations: tuple[DeterminingEquation, ...]
    basis: tuple[Expr, ...]

    def __iter__(self):
        return iter(self.equations)

    def __len__(self) -> int:
        return len(self.equations)

    def report(self) -> str:
        mode = "conditional" if self.ansatz.conditional else "classical"
        lines = [f"# {mode} determining system for {self.equation}"]
        if self.ansatz.conditional:
            lines.append(f"# gauge: {self.ansatz.gauge} = 1")
        lines.append("# basis: monomials in " + (", ".join(k_name(b) for b in self.basis) or "(none)"))
        lines.extend(str(d) for d in self.equations)
        return "\n".join(lines)


def _is_basis(k: Expr) -> bool:
    return any(j.order > 0 for j in jets(k)) and not isinstance(k, Fn)


@lru_cache(maxsize=64)
def determining_system(eq: Equation, ansatz: Optional[Ansatz] = None) -> DeterminingSystem:
    """Coefficients of the jet monomials of pr X E restricted to E = 0 (and C = 0 in conditional mode)."""
    ansatz = ansatz or Ansatz()
    field_ = ansatz.field()
    if ansatz.conditional:
        value = conditional_residual(field_, eq)
    else:
        value = point_residual(field_, eq)
    cf = canonicalize(value)
    basis = tuple(k for k in cf.kernels if _is_basis(k))
    groups: dict[tuple, list[Expr]] = defaultdict(list)
    for coeff, mono in cf.terms():
        key = tuple(sorted(((k, n) for k, n in mono.items() if k in basis), key=lambda kn: kernel_key(kn[0])))
        rest = [power(k, n) for k, n in mono.items() if k not in basis]
        groups[key].append(mul(Num(coeff), *rest))
    out = [DeterminingEquation(key, simplify(add(*terms))) for key, terms in groups.items()]
    out.sort(key=lambda d: (sum(n for _, n in d.monomial),
                            [(kernel_key(k), n) for k, n in d.monomial]))
    return DeterminingSystem(eq, ansatz, tuple(out), basis)


class _DerivativeTable(dict):
    """Partial derivatives of a concrete field's coefficients, computed on first use."""

    def __init__(self, field_: VectorField):
        super().__init__()
        self.values = dict(zip(("xi", "eta", "phi"), field_.components()))

    def fill(self, e: Expr) -> "_DerivativeTable":
        for node in walk(e):
            if isinstance(node, Fn) and node not in self:
                value = self.values[node.name]
                for v in node.index.letters():
                    value = partial_derivative(value, Jet("u") if v == "u" else Atom(v))
                self[node] = simplify(value)
        return self


def _residual(d: DeterminingEquation, table: _DerivativeTable) -> Expr:
    return substitute_many(d.expr, table.fill(d.expr))


def check_candidate(system: DeterminingSystem, field_: VectorField) -> bool:
    """True iff the concrete field (in the system's gauge) satisfies every determining equation."""
    try:
        field_ = system.ansatz.normalize(field_)
    except ValueError:
        return False
    table = _DerivativeTable(field_)
    return all(is_zero(_residual(d, table)) for d in system.equations)


def failing_equations(system: DeterminingSystem, field_: VectorField) -> list[tuple[DeterminingEquation, Expr]]:
    """The equations a candidate violates, each with its nonzero residual."""
    field_ = system.ansatz.normalize(field_)
    table = _DerivativeTable(field_)
    out = []
    for d in system.equations:
        r = simplify(_residual(d, table))
        if not is_zero(r):
            out.append((d, r))
    return out
