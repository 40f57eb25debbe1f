import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jetsym.canonical import equal, is_zero
from jetsym.expr import Jet, MultiIndex, add, mul, partial_derivative, substitute
from jetsym.jet import (
    Eliminator,
    JetError,
    JetRanking,
    leading_variable,
    multi_total_derivative,
    solve_linear_for,
    total_derivative,
)

from util import P, U, UX, UXX, UXY, UY, X, Y, polynomials, same

C1 = P("2*y + y*u_x + u_y")
C6 = P("u_x - 2*u/x - 48/x^3")


def test_total_derivative_examples():
    assert same(total_derivative(C1, "x"), P("y*u_xx + u_xy"))
    assert is_zero(total_derivative(Y, "x"))
    assert total_derivative(U, "x") == UX
    assert same(total_derivative(P("x^2*u + x^4/y^2"), "y"), P("x^2*u_y - 2*x^4/y^3"))


def test_total_derivative_rejects_constants():
    from jetsym.expr import Atom
    with pytest.raises(JetError):
        total_derivative(U, Atom("g3", "constant"))


def test_multi_total_derivative_examples():
    assert multi_total_derivative(C1, MultiIndex()) == C1
    assert same(multi_total_derivative(C1, "x"), P("y*u_xx + u_xy"))
    assert multi_total_derivative(U, "xxy") == Jet("u", "xxy")


def test_leading_variable_examples():
    assert leading_variable(C1, JetRanking("y")) == UY
    assert leading_variable(C6, JetRanking("x")) == UX
    assert leading_variable(U, JetRanking("y")) == U
    with pytest.raises(JetError):
        leading_variable(P("x + y"), JetRanking("y"))


def test_ranking_orders():
    r = JetRanking.from_mode("eliminate-y")
    assert r.mode == "eliminate-y"
    assert r.key(UY) > r.key(Jet("u", "xxxx"))
    assert r.key(Jet("u", "yy")) > r.key(UXY) > r.key(UY)
    rx = JetRanking("x")
    assert rx.key(UX) > rx.key(Jet("u", "yyyy"))
    with pytest.raises(ValueError):
        JetRanking.from_mode("sideways")


def test_solve_linear_for_examples():
    assert same(solve_linear_for(C1, UY), P("-2*y - y*u_x"))
    assert same(solve_linear_for(C6, UX), P("2*u/x + 48/x^3"))
    with pytest.raises(JetError, match="not linear"):
        solve_linear_for(P("u_x^2"), UX)
    with pytest.raises(JetError, match="does not occur"):
        solve_linear_for(P("u_x"), UY)


@pytest.mark.parametrize("c, ranking", [(C1, "y"), (C6, "x"), (P("y*u_y - x*u_x - 2*u - 6*x^2/y^2"), "y")])
def test_solve_substitute_inverse(c, ranking):
    v = leading_variable(c, JetRanking(ranking))
    assert is_zero(substitute(c, v, solve_linear_for(c, v)))


def test_eliminator_substitutes_consequences():
    e = Eliminator(UY, P("-2*y - y*u_x"))
    assert same(e.reduce(P("u_xy")), P("-y*u_xx"))
    assert same(e.reduce(P("u_yy")), P("-2 - u_x + y^2*u_xx"))


def test_eliminator_rank_guard():
    with pytest.raises(JetError, match="rank"):
        Eliminator(UX, P("u_xx"), JetRanking("x"))


order2 = polynomials((X, Y, U, UX, UY, UXX, UXY, Jet("u", "yy")), max_degree=3, max_terms=4)


@settings(max_examples=200, deadline=None)
@given(order2)
def test_total_derivatives_commute(e):
    assert equal(total_derivative(total_derivative(e, "y"), "x"),
                 total_derivative(total_derivative(e, "x"), "y"))


@settings(max_examples=200, deadline=None)
@given(order2, order2, st.sampled_from("xy"))
def test_total_derivative_leibniz(a, b, v):
    lhs = total_derivative(mul(a, b), v)
    rhs = add(mul(a, total_derivative(b, v)), mul(b, total_derivative(a, v)))
    assert equal(lhs, rhs)


@settings(max_examples=50, deadline=None)
@given(polynomials((X, Y), max_degree=3), st.sampled_from("xy"))
def test_total_equals_partial_without_jets(e, v):
    from jetsym.expr import Atom
    assert equal(total_derivative(e, v), partial_derivative(e, Atom(v)))
