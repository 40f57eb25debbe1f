"""Immutable expression trees over numbers, atoms, jet variables and opaque functions.

Nodes are built through the smart constructors :func:`add`, :func:`mul` and
:func:`power` (or the overloaded Python operators), which flatten nested sums
and products and fold numeric constants.  Anything deeper, such as collecting
like terms or cancelling common factors, belongs to :mod:`jetsym.canonical`.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union

Number = Union[int, Fraction]


class MultiIndex:
    """Derivative counts per variable; ``MultiIndex("xxy")`` is two x's and one y.

    Variables are single letters, so the canonical text form is the sorted
    letter string.  The empty index stands for the undifferentiated variable.
    """

    __slots__ = ("counts", "_hash")

    def __init__(self, spec: Union[str, Mapping[str, int], Iterable[tuple[str, int]], None] = None):
        if spec is None:
            items: Iterable[tuple[str, int]] = ()
        elif isinstance(spec, str):
            items = Counter(spec).items()
        elif isinstance(spec, Mapping):
            items = spec.items()
        else:
            items = spec
        counts = {}
        for var, n in items:
            if len(var) != 1 or not var.isalpha():
                raise ValueError(f"multi-index variables must be single letters, got {var!r}")
            if n < 0:
                raise ValueError("multi-index counts must be non-negative")
            if n:
                counts[var] = counts.get(var, 0) + n
        self.counts: tuple[tuple[str, int], ...] = tuple(sorted(counts.items()))
        self._hash = hash(self.counts)

    @property
    def order(self) -> int:
        return sum(n for _, n in self.counts)

    def count(self, var: str) -> int:
        for v, n in self.counts:
            if v == var:
                return n
        return 0

    def letters(self) -> str:
        return "".join(v * n for v, n in self.counts)

    def raised(self, var: str, n: int = 1) -> "MultiIndex":
        return MultiIndex(self.counts + ((var, n),))

    def lowered(self, var: str) -> "MultiIndex":
        if not self.count(var):
            raise ValueError(f"cannot lower {self.letters()!r} in {var!r}")
        return MultiIndex({v: (n - 1 if v == var else n) for v, n in self.counts})

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        return MultiIndex(self.counts + other.counts)

    def __sub__(self, other: "MultiIndex") -> "MultiIndex":
        if not other <= self:
            raise ValueError(f"{other} is not contained in {self}")
        return MultiIndex({v: n - other.count(v) for v, n in self.counts})

    def __le__(self, other: "MultiIndex") -> bool:
        """Componentwise containment (``other`` is a further derivative of ``self``)."""
        return all(other.count(v) >= n for v, n in self.counts)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MultiIndex) and self.counts == other.counts

    def __hash__(self) -> int:
        return self._hash

    def __iter__(self) -> Iterator[str]:
        return iter(self.letters())

    def __bool__(self) -> bool:
        return bool(self.counts)

    def __repr__(self) -> str:
        return f"MultiIndex({self.letters()!r})"

    def __str__(self) -> str:
        return self.letters() or "-"


EMPTY = MultiIndex()


class Expr:
    __slots__ = ("_hash",)

    def _key(self) -> tuple:
        raise NotImplementedError

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        return type(self) is type(other) and self._hash == other._hash and self._key() == other._key()

    def __hash__(self) -> int:
        return self._hash

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return mul(self, power(as_expr(other), -1))

    def __rtruediv__(self, other):
        return mul(as_expr(other), power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer exponents are supported")
        return power(self, n)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({to_text(self)!r})"

    def __str__(self) -> str:
        return to_text(self)

    def children(self) -> tuple["Expr", ...]:
        return ()


class Num(Expr):
    __slots__ = ("value",)

    def __init__(self, value: Number):
        self.value = Fraction(value)
        self._hash = hash(("Num", self.value))

    def _key(self):
        return (self.value,)


class Atom(Expr):
    """Independent variable or constant."""

    __slots__ = ("name", "kind")
    KINDS = ("independent", "constant")

    def __init__(self, name: str, kind: str = "independent"):
        if kind not in self.KINDS:
            raise ValueError(f"unknown atom kind {kind!r}")
        self.name = name
        self.kind = kind
        self._hash = hash(("Atom", name, kind))

    def _key(self):
        return (self.name, self.kind)


class Jet(Expr):
    """The jet coordinate u_J; the empty index is the dependent variable itself."""

    __slots__ = ("dependent", "index")

    def __init__(self, dependent: str, index: Union[MultiIndex, str] = EMPTY):
        self.dependent = dependent
        self.index = index if isinstance(index, MultiIndex) else MultiIndex(index)
        self._hash = hash(("Jet", dependent, self.index))

    def _key(self):
        return (self.dependent, self.index)

    @property
    def order(self) -> int:
        return self.index.order

    def raised(self, var: str, n: int = 1) -> "Jet":
        return Jet(self.dependent, self.index.raised(var, n))

    def name(self) -> str:
        return self.dependent + ("_" + self.index.letters() if self.index else "")


@dataclass(frozen=True, eq=False)
class Function:
    """An opaque unary function known only through its derivative and side relations.

    ``derivative(arg)`` returns f'(arg); chain rule is applied by the caller.
    ``side_relation`` is ``(p, rhs)``: f(arg)**p rewrites to ``rhs(arg)``, which
    must not contain f(arg) itself (so rewriting terminates).
    """

    name: str
    derivative: Callable[["Expr"], "Expr"] = field(repr=False)
    side_relation: Optional[tuple[int, Callable[["Expr"], "Expr"]]] = field(default=None, repr=False)

    def __eq__(self, other):
        return isinstance(other, Function) and other.name == self.name

    def __hash__(self):
        return hash(("Function", self.name))

    def __call__(self, arg) -> "App":
        return App(self, as_expr(arg))


class App(Expr):
    __slots__ = ("func", "arg")

    def __init__(self, func: Function, arg: Expr):
        self.func = func
        self.arg = arg
        self._hash = hash(("App", func.name, arg))

    def _key(self):
        return (self.func.name, self.arg)

    def children(self):
        return (self.arg,)


class Fn(Expr):
    """Partial derivative of an undetermined function of (x, y, u), e.g. ``xi_xu``.

    Used for symmetry ansatz coefficients; ``args`` are the variable letters the
    function depends on (the dependent variable included).
    """

    __slots__ = ("name", "index", "args")

    def __init__(self, name: str, index: Union[MultiIndex, str] = EMPTY, args: str = "xyu"):
        self.name = name
        self.index = index if isinstance(index, MultiIndex) else MultiIndex(index)
        self.args = args
        if any(v not in args for v in self.index.letters()):
            raise ValueError(f"{name} does not depend on all of {self.index.letters()!r}")
        self._hash = hash(("Fn", name, self.index, args))

    def _key(self):
        return (self.name, self.index, self.args)

    def label(self) -> str:
        return self.name + ("_" + self.index.letters() if self.index else "")


class Add(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms: tuple[Expr, ...]):
        self.terms = terms
        self._hash = hash(("Add", terms))

    def _key(self):
        return self.terms

    def children(self):
        return self.terms


class Mul(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors: tuple[Expr, ...]):
        self.factors = factors
        self._hash = hash(("Mul", factors))

    def _key(self):
        return self.factors

    def children(self):
        return self.factors


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base: Expr, exp: int):
        if not isinstance(exp, int) or exp == 0:
            raise ValueError("exponents must be nonzero integers")
        self.base = base
        self.exp = exp
        self._hash = hash(("Pow", base, exp))

    def _key(self):
        return (self.base, self.exp)

    def children(self):
        return (self.base,)


ZERO = Num(0)
ONE = Num(1)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return Num(value)
    raise TypeError(f"cannot convert {value!r} to an expression")


def is_number(e: Expr, value=None) -> bool:
    return isinstance(e, Num) and (value is None or e.value == value)


def add(*terms: Expr) -> Expr:
    flat: list[Expr] = []
    const = Fraction(0)
    for t in terms:
        parts = t.terms if isinstance(t, Add) else (t,)
        for p in parts:
            if isinstance(p, Num):
                const += p.value
            else:
                flat.append(p)
    if const:
        flat.append(Num(const))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Add(tuple(flat))


def mul(*factors: Expr) -> Expr:
    flat: list[Expr] = []
    const = Fraction(1)
    for f in factors:
        parts = f.factors if isinstance(f, Mul) else (f,)
        for p in parts:
            if isinstance(p, Num):
                const *= p.value
            else:
                flat.append(p)
    if not const:
        return ZERO
    if const != 1:
        flat.insert(0, Num(const))
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    return Mul(tuple(flat))


def power(base: Expr, n: int) -> Expr:
    if n == 0:
        return ONE
    if n == 1:
        return base
    if isinstance(base, Num):
        if not base.value and n < 0:
            raise ZeroDivisionError("division by zero")
        return Num(base.value ** n)
    if isinstance(base, Pow):
        return power(base.base, base.exp * n)
    return Pow(base, n)


def neg(e: Expr) -> Expr:
    return mul(Num(-1), e)


# -- built-in opaque functions ------------------------------------------------

def _exp_derivative(arg: Expr) -> Expr:
    return App(EXP, arg)


def _ln_derivative(arg: Expr) -> Expr:
    return power(arg, -1)


EXP = Function("exp", _exp_derivative)
LN = Function("ln", _ln_derivative)

BUILTIN_FUNCTIONS: dict[str, Function] = {"exp": EXP, "ln": LN}


def weierstrass_functions(g3: Expr, c3: Optional[Expr] = None) -> dict[str, Function]:
    """Opaque functions for the equianharmonic case g2 = 0 of Weierstrass' p.

    ``wp`` and ``wpd`` are p and p' with p'' = 6 p^2 and p'^2 = 4 p^3 - g3;
    ``W`` is the primitive of wp/wpd^2 and ``R`` the primitive of 1/wp(s + c3)^2.
    """
    def d_wp(arg):
        return App(WPD, arg)

    def d_wpd(arg):
        return mul(Num(6), power(App(WP, arg), 2))

    def wpd_squared(arg):
        return add(mul(Num(4), power(App(WP, arg), 3)), neg(g3))

    WP = Function("wp", d_wp)
    WPD = Function("wpd", d_wpd, side_relation=(2, wpd_squared))

    def d_w(arg):
        return mul(App(WP, arg), power(App(WPD, arg), -2))

    funcs = {"wp": WP, "wpd": WPD, "W": Function("W", d_w)}
    if c3 is not None:
        def d_r(arg):
            return power(App(WP, add(arg, c3)), -2)

        funcs["R"] = Function("R", d_r)
    return funcs


# -- traversal ----------------------------------------------------------------

def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal, visiting shared subtrees once."""
    seen = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        yield node
        stack.extend(node.children())


def jets(e: Expr) -> set[Jet]:
    """Jet variables e depends on; ansatz functions count as depending on u."""
    found = set()
    for node in walk(e):
        if isinstance(node, Jet):
            found.add(node)
        elif isinstance(node, Fn):
            found.add(Jet("u") if "u" in node.args else None)
    found.discard(None)
    return found


def atoms(e: Expr) -> set[Atom]:
    return {n for n in walk(e) if isinstance(n, Atom)}


def jet_order(e: Expr) -> int:
    return max((j.order for j in jets(e)), default=0)


def map_leaves(e: Expr, fn: Callable[[Expr], Optional[Expr]]) -> Expr:
    """Rebuild e, replacing every node for which ``fn`` returns non-None."""
    memo: dict[Expr, Expr] = {}

    def go(node: Expr) -> Expr:
        if node in memo:
            return memo[node]
        hit = fn(node)
        if hit is not None:
            out = hit
        elif isinstance(node, Add):
            out = add(*(go(t) for t in node.terms))
        elif isinstance(node, Mul):
            out = mul(*(go(f) for f in node.factors))
        elif isinstance(node, Pow):
            out = power(go(node.base), node.exp)
        elif isinstance(node, App):
            out = App(node.func, go(node.arg))
        else:
            out = node
        memo[node] = out
        return out

    return go(e)


def substitute(e: Expr, target: Expr, replacement: Expr) -> Expr:
    """Replace every occurrence of an atomic node. The result is not canonicalized."""
    if not isinstance(target, (Atom, Jet, App, Fn)):
        raise TypeError("substitution target must be an atom, jet variable or function application")
    replacement = as_expr(replacement)
    return map_leaves(e, lambda node: replacement if node == target else None)


def substitute_many(e: Expr, mapping: Mapping[Expr, Expr]) -> Expr:
    """Simultaneous substitution of several atomic targets."""
    return map_leaves(e, lambda node: mapping.get(node) if isinstance(node, (Atom, Jet, App, Fn)) else None)


# -- partial derivatives ------------------------------------------------------

def partial_derivative(e: Expr, v: Union[Atom, Jet]) -> Expr:
    """Partial derivative treating atoms, jets and applications as independent coordinates.

    Opaque applications differentiate through their argument only; an ansatz
    function ``Fn`` depends on the letters in its ``args``.
    """
    if not isinstance(v, (Atom, Jet)):
        raise TypeError("can only differentiate with respect to an atom or jet variable")
    if isinstance(v, Jet) and v.order == 0:
        fn_letter = v.dependent
    elif isinstance(v, Atom) and v.kind == "independent":
        fn_letter = v.name
    else:
        fn_letter = None
    memo: dict[Expr, Expr] = {}

    def d(node: Expr) -> Expr:
        if node in memo:
            return memo[node]
        if isinstance(node, (Num,)):
            out = ZERO
        elif isinstance(node, (Atom, Jet)):
            out = ONE if node == v else ZERO
        elif isinstance(node, Fn):
            if fn_letter is not None and fn_letter in node.args:
                out = Fn(node.name, node.index.raised(fn_letter), node.args)
            else:
                out = ZERO
        elif isinstance(node, App):
            inner = d(node.arg)
            out = ZERO if is_number(inner, 0) else mul(node.func.derivative(node.arg), inner)
        elif isinstance(node, Add):
            out = add(*(d(t) for t in node.terms))
        elif isinstance(node, Mul):
            parts = []
            fs = node.factors
            for i, f in enumerate(fs):
                df = d(f)
                if is_number(df, 0):
                    continue
                parts.append(mul(*fs[:i], df, *fs[i + 1:]))
            out = add(*parts)
        elif isinstance(node, Pow):
            db = d(node.base)
            out = ZERO if is_number(db, 0) else mul(Num(node.exp), power(node.base, node.exp - 1), db)
        else:  # pragma: no cover
            raise TypeError(node)
        memo[node] = out
        return out

    return d(e)


# -- raw printing -------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4


def _fmt_number(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def to_text(e: Expr) -> str:
    """Structural (non-canonical) text; parses back to an equal value."""
    return _raw(e)[0]


def _raw(e: Expr) -> tuple[str, int]:
    if isinstance(e, Num):
        s = _fmt_number(e.value)
        return s, (_PREC_ATOM if e.value >= 0 and e.value.denominator == 1 else _PREC_ADD)
    if isinstance(e, Atom):
        return e.name, _PREC_ATOM
    if isinstance(e, Jet):
        return e.name(), _PREC_ATOM
    if isinstance(e, Fn):
        return e.label(), _PREC_ATOM
    if isinstance(e, App):
        return f"{e.func.name}({to_text(e.arg)})", _PREC_ATOM
    if isinstance(e, Pow):
        s, p = _raw(e.base)
        if p < _PREC_ATOM:
            s = f"({s})"
        exp = str(e.exp) if e.exp > 0 else f"({e.exp})"
        return f"{s}^{exp}", _PREC_POW
    if isinstance(e, Mul):
        parts = []
        for f in e.factors:
            s, p = _raw(f)
            parts.append(f"({s})" if p < _PREC_MUL else s)
        return "*".join(parts), _PREC_MUL
    if isinstance(e, Add):
        out = ""
        for i, t in enumerate(e.terms):
            s, p = _raw(t)
            if i == 0:
                out = s
            elif s.startswith("-"):
                out += " - " + s[1:]
            else:
                out += " + " + s
        return out, _PREC_ADD
    raise TypeError(e)  # pragma: no cover
