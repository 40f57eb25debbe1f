"""Canonical rational-function normal form for expression trees.

An expression is mapped to a reduced fraction num/den of multivariate
polynomials with exact rational coefficients.  The polynomial variables
("kernels") are the atoms, jet variables, ansatz functions and irreducible
opaque applications occurring in the expression, ordered deterministically so
that printing is stable.  Polynomial gcds are delegated to sympy's sparse
polynomial rings.

Opaque applications get a little algebra of their own before they become
kernels: ``exp`` of a sum splits into a product, ``exp(k*ln(z))`` becomes
``z**k`` and ``ln`` of a monomial splits into a sum of logarithms.  Side
relations f(a)**p -> r(a) reduce every kernel power below p, and the
denominator is rationalized so it is free of such kernels.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

from sympy import QQ, grlex, symbols
from sympy.polys.fields import FracField

from .expr import (
    EXP,
    LN,
    ONE,
    Add,
    App,
    Atom,
    Expr,
    Fn,
    Jet,
    Mul,
    Num,
    Pow,
    _fmt_number,
    add,
    mul,
    power,
)

Monomial = tuple[int, ...]


def kernel_key(k: Expr) -> tuple:
    """Sort key: independent variables, constants, jets, ansatz functions, applications."""
    if isinstance(k, Atom):
        return (0 if k.kind == "independent" else 1, k.name)
    if isinstance(k, Jet):
        return (2, k.dependent, k.order, k.index.letters())
    if isinstance(k, Fn):
        return (3, k.name, k.index.order, k.index.letters())
    if isinstance(k, App):
        return (4, k.func.name, render(canonicalize(k.arg)))
    raise TypeError(k)


@lru_cache(maxsize=64)
def _field(n: int) -> FracField:
    return FracField(symbols(f"k0:{max(n, 1)}"), QQ, grlex)


@dataclass(frozen=True)
class CanonicalForm:
    """Reduced fraction ``num/den`` over ``kernels``.

    ``num`` and ``den`` are tuples of (exponent vector, coefficient) in
    decreasing graded-lex order; ``den`` has integer coprime coefficients with a
    positive leading coefficient, and ``num`` is integral when ``den`` is 1 up to
    a rational content moved into ``den``.
    """

    kernels: tuple[Expr, ...]
    num: tuple[tuple[Monomial, int], ...]
    den: tuple[tuple[Monomial, int], ...]

    @property
    def is_zero(self) -> bool:
        return not self.num

    @property
    def is_polynomial(self) -> bool:
        return self.den == (((0,) * len(self.kernels), 1),)

    def numerator(self) -> "CanonicalForm":
        one = (((0,) * len(self.kernels), 1),)
        return _normalized(self.kernels, self.num, one)

    def denominator(self) -> "CanonicalForm":
        one = (((0,) * len(self.kernels), 1),)
        return _normalized(self.kernels, self.den, one)

    def terms(self) -> list[tuple[Fraction, dict[Expr, int]]]:
        """Numerator terms as (coefficient, {kernel: exponent})."""
        return [
            (Fraction(c), {self.kernels[i]: e for i, e in enumerate(m) if e})
            for m, c in self.num
        ]

    def to_expr(self) -> Expr:
        n = _poly_expr(self.kernels, self.num)
        if self.is_polynomial:
            return n
        return mul(n, power(_poly_expr(self.kernels, self.den), -1))

    def __str__(self) -> str:
        return render(self)


def _monomial_expr(kernels, m: Monomial, c) -> Expr:
    return mul(Num(c), *(power(kernels[i], e) for i, e in enumerate(m) if e))


def _poly_expr(kernels, terms) -> Expr:
    return add(*(_monomial_expr(kernels, m, c) for m, c in terms))


def _normalized(kernels, num_terms, den_terms) -> CanonicalForm:
    """Drop unused kernels and fix the rational content of a coprime pair."""
    if not num_terms:
        return CanonicalForm((), (), (((), 1),))
    used = sorted({i for m, _ in list(num_terms) + list(den_terms) for i, e in enumerate(m) if e})
    ks = tuple(kernels[i] for i in used)

    def shrink(terms):
        return [(tuple(m[i] for i in used), Fraction(c)) for m, c in terms]

    nt, dt = shrink(num_terms), shrink(den_terms)
    nt.sort(key=lambda t: _grlex_key(t[0]), reverse=True)
    dt.sort(key=lambda t: _grlex_key(t[0]), reverse=True)
    # den -> primitive integer polynomial with positive leading coefficient
    dc = _content(dt)
    if dt[0][1] < 0:
        dc = -dc
    dt = [(m, c / dc) for m, c in dt]
    nt = [(m, c / dc) for m, c in nt]
    # num = (a/b) * primitive integer polynomial; a stays, b joins the denominator
    nc = _content(nt)
    a, b = nc.numerator, nc.denominator
    nt = [(m, int(c / nc) * a) for m, c in nt]
    dt = [(m, int(c) * b) for m, c in dt]
    return CanonicalForm(ks, tuple(nt), tuple(dt))


def _grlex_key(m: Monomial):
    return (sum(m), m)


def _content(terms) -> Fraction:
    num = 0
    den = 1
    for _, c in terms:
        c = Fraction(c)
        num = gcd(num, c.numerator)
        den = den * c.denominator // gcd(den, c.denominator)
    return Fraction(num, den)


# -- preparation: normalize opaque applications --------------------------------

def _prepare(e: Expr, memo: dict) -> Expr:
    if e in memo:
        return memo[e]
    if isinstance(e, Add):
        out = add(*(_prepare(t, memo) for t in e.terms))
    elif isinstance(e, Mul):
        out = mul(*(_prepare(f, memo) for f in e.factors))
    elif isinstance(e, Pow):
        out = power(_prepare(e.base, memo), e.exp)
    elif isinstance(e, App):
        out = _normalize_app(e)
    else:
        out = e
    memo[e] = out
    return out


def _normalize_app(e: App) -> Expr:
    cf = canonicalize(e.arg)
    arg = cf.to_expr()
    if e.func == EXP:
        return _normalize_exp(cf, arg)
    if e.func == LN:
        return _normalize_ln(cf, arg)
    return App(e.func, arg)


def _normalize_exp(cf: CanonicalForm, arg: Expr) -> Expr:
    if cf.is_zero:
        return ONE
    if not cf.is_polynomial:
        return App(EXP, arg)
    (_, d), = cf.den
    factors = []
    for m, c in cf.num:
        c = Fraction(c, d)
        present = [(cf.kernels[i], p) for i, p in enumerate(m) if p]
        if not present:
            factors.append(App(EXP, Num(c)))
        elif len(present) == 1 and present[0][1] == 1 and isinstance(present[0][0], App) \
                and present[0][0].func == LN and c.denominator == 1:
            factors.append(power(present[0][0].arg, int(c)))
        elif c.denominator == 1:
            mono = mul(*(power(k, p) for k, p in present))
            factors.append(power(App(EXP, mono), int(c)))
        else:
            factors.append(App(EXP, _monomial_expr(cf.kernels, m, c)))
    return mul(*factors)


def _normalize_ln(cf: CanonicalForm, arg: Expr) -> Expr:
    if cf.is_zero or len(cf.num) != 1 or len(cf.den) != 1:
        return App(LN, arg)
    (mn, cn), = cf.num
    (md, cd), = cf.den
    c = Fraction(cn, cd)
    if c < 0:
        return App(LN, arg)
    parts = []
    for i, k in enumerate(cf.kernels):
        p = mn[i] - md[i]
        if not p:
            continue
        if isinstance(k, App) and k.func == EXP:
            parts.append(mul(Num(p), k.arg))
        else:
            parts.append(mul(Num(p), App(LN, k)))
    if c != 1:
        parts.append(App(LN, Num(c)))
    return add(*parts)


def _collect_kernels(e: Expr, found: dict) -> None:
    stack = [e]
    seen = set()
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        if isinstance(node, (Atom, Jet, Fn)):
            found[node] = None
        elif isinstance(node, App):
            if node not in found:
                found[node] = None
                rel = node.func.side_relation
                if rel is not None:
                    _collect_kernels(_prepare(rel[1](node.arg), {}), found)
        elif isinstance(node, (Add, Mul)):
            stack.extend(node.children())
        elif isinstance(node, Pow):
            stack.append(node.base)


# -- side relations ------------------------------------------------------------

def _reduce_side(poly, relations):
    """Rewrite kernel powers k**p (p >= relation power) using the relation polynomial."""
    ring = poly.ring
    changed = True
    while changed:
        changed = False
        out = ring.zero
        for m, c in poly.terms():
            for i, p, rhs in relations:
                if m[i] >= p:
                    q, r = divmod(m[i], p)
                    base = list(m)
                    base[i] = r
                    out += ring({tuple(base): c}) * rhs ** q
                    changed = True
                    break
            else:
                out += ring({m: c})
        poly = out
    return poly


def _rationalize(num, den, relations):
    """Make the denominator free of relation kernels (degree-2 relations only)."""
    ring = num.ring
    for i, p, rhs in relations:
        if p != 2:
            continue
        if all(m[i] == 0 for m in den.monoms()):
            continue
        # den = d0 + d1 * k  ->  multiply by d0 - d1 * k
        conj = ring.zero
        for m, c in den.terms():
            conj += ring({m: -c if m[i] else c})
        num = _reduce_side(num * conj, relations)
        den = _reduce_side(den * conj, relations)
    return num, den


# -- entry point -----------------------------------------------------------------

@lru_cache(maxsize=8192)
def canonicalize(e: Expr) -> CanonicalForm:
    """Normal form of e; raises ZeroDivisionError on an identically zero divisor."""
    if isinstance(e, Num):
        q = e.value
        if not q:
            return CanonicalForm((), (), (((), 1),))
        return CanonicalForm((), (((), q.numerator),), (((), q.denominator),))
    prepared = _prepare(e, {})
    found: dict = {}
    _collect_kernels(prepared, found)
    kernels = tuple(sorted(found, key=kernel_key))
    F = _field(len(kernels))
    gens = F.gens
    index = {k: i for i, k in enumerate(kernels)}
    memo: dict = {}

    def conv(node: Expr):
        if node in memo:
            return memo[node]
        if isinstance(node, Num):
            out = F.ground_new(QQ(node.value.numerator, node.value.denominator))
        elif isinstance(node, (Atom, Jet, Fn, App)):
            out = gens[index[node]]
        elif isinstance(node, Add):
            out = F.zero
            for t in node.terms:
                out = out + conv(t)
        elif isinstance(node, Mul):
            out = F.one
            for f in node.factors:
                out = out * conv(f)
        elif isinstance(node, Pow):
            b = conv(node.base)
            if not b:
                raise ZeroDivisionError("division by an identically zero expression")
            out = b ** node.exp
        else:  # pragma: no cover
            raise TypeError(node)
        memo[node] = out
        return out

    value = conv(prepared)
    num, den = value.numer, value.denom
    relations = []
    for k, i in index.items():
        if isinstance(k, App) and k.func.side_relation is not None:
            p, rhs = k.func.side_relation
            r = conv(_prepare(rhs(k.arg), {}))
            if r.denom != F.ring.one:
                raise ValueError(f"side relation of {k.func.name} must be polynomial")
            relations.append((i, p, r.numer))
    if relations:
        num = _reduce_side(num, relations)
        den = _reduce_side(den, relations)
        num, den = _rationalize(num, den, relations)
        num, den = num.cancel(den)
    if not num:
        return CanonicalForm((), (), (((), 1),))
    to_terms = lambda p: [(m, Fraction(int(c.numerator), int(c.denominator))) for m, c in p.terms()]
    return _normalized(kernels, to_terms(num), to_terms(den))


def is_zero(e: Expr) -> bool:
    return canonicalize(e).is_zero


def simplify(e: Expr) -> Expr:
    """Canonical form converted back to a tree."""
    return canonicalize(e).to_expr()


def equal(a: Expr, b: Expr) -> bool:
    return is_zero(add(a, mul(Num(-1), b)))


# -- printing --------------------------------------------------------------------

def _kernel_text(k: Expr) -> str:
    if isinstance(k, Atom):
        return k.name
    if isinstance(k, Jet):
        return k.name()
    if isinstance(k, Fn):
        return k.label()
    if isinstance(k, App):
        return f"{k.func.name}({render(canonicalize(k.arg))})"
    raise TypeError(k)


def _poly_text(kernels, terms) -> str:
    out = []
    for m, c in terms:
        factors = []
        for i, e in enumerate(m):
            if e:
                t = _kernel_text(kernels[i])
                factors.append(t if e == 1 else f"{t}^{e}")
        mag = abs(c)
        if not factors:
            body = str(mag)
        elif mag == 1:
            body = "*".join(factors)
        else:
            body = "*".join([str(mag)] + factors)
        if not out:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append((" - " if c < 0 else " + ") + body)
    return "".join(out)


def render(cf: CanonicalForm) -> str:
    """Deterministic text of a canonical form (graded-lex, kernels in canonical order)."""
    if cf.is_zero:
        return "0"
    n = _poly_text(cf.kernels, cf.num)
    if cf.is_polynomial:
        return n
    if len(cf.num) > 1:
        n = f"({n})"
    d = _poly_text(cf.kernels, cf.den)
    nfactors = sum(1 for e in cf.den[0][0] if e)
    single = len(cf.den) == 1 and (nfactors == 0 or (cf.den[0][1] == 1 and nfactors == 1))
    if not single:
        d = f"({d})"
    return f"{n}/{d}"


def to_string(e: Expr) -> str:
    """Canonical text of e; ``parse(to_string(e))`` canonicalizes back to e."""
    return render(canonicalize(e))


def format_number(q: Fraction) -> str:
    return _fmt_number(q)
