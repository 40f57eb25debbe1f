"""Shared helpers and hypothesis strategies for the test suite."""
from hypothesis import strategies as st

from jetsym.canonical import is_zero
from jetsym.expr import Atom, Jet, Num, add, mul, neg, power
from jetsym.parser import Workspace, parse
from jetsym.symmetry import Equation, VectorField

X, Y, U = Atom("x"), Atom("y"), Jet("u")
UX, UY, UXX, UXY, UYY = (Jet("u", i) for i in ("x", "y", "xx", "xy", "yy"))

WEIERSTRASS = Workspace(constants=("b2", "g3", "c0", "c1", "c2", "c3"))


def P(text, ws=None):
    return parse(text, ws or Workspace())


def F(xi, eta, phi, ws=None):
    return VectorField(P(xi, ws), P(eta, ws), P(phi, ws))


def same(a, b):
    return is_zero(add(a, neg(b)))


BOUSSINESQ = Equation.from_lhs(P("u_yy + u*u_xx + u_x^2 + u_xxxx"), Jet("u", "xxxx"), "boussinesq")

FIELDS = {
    "X1": F("y", "1", "-2*y"),
    "X2": F("-x/y", "1", "2/y*u + 6/y^3*x^2"),
    "X3": F("-x/y + y^4", "1", "2/y*u + 6/y^3*x^2 - 2*y^2*x - 4*y^7"),
    "X4": F("x/(2*y) + y", "1", "-(u + 2*x + 4*y^2)/y"),
    "X6": F("1", "0", "2/x*u + 48/x^3"),
    "Y": F("x/(2*y)", "1", "-1/y"),
}


def _monomial(atoms, max_degree):
    return st.tuples(
        st.integers(-5, 5).filter(bool),
        st.lists(st.sampled_from(atoms), max_size=max_degree),
    ).map(lambda t: mul(Num(t[0]), *t[1]))


def polynomials(atoms=(X, Y, U, UX, UY, UXX, UXY, UYY), max_degree=3, max_terms=4):
    """Random polynomials with small integer coefficients."""
    return st.lists(_monomial(list(atoms), max_degree), min_size=1, max_size=max_terms).map(lambda ts: add(*ts))


def rationals(atoms=(X, Y, U, UX, UY), max_degree=2):
    """Quotients whose denominator is a nonzero monomial plus a constant."""
    den = st.tuples(st.integers(1, 3), st.sampled_from([X, Y]), st.integers(1, 2)).map(
        lambda t: add(Num(t[0]), power(t[1], t[2])))
    return st.tuples(polynomials(atoms, max_degree, 3), den).map(lambda t: mul(t[0], power(t[1], -1)))


point_polynomials = polynomials((X, Y, U), max_degree=2, max_terms=3)
