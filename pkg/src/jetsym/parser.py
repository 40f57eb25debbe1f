"""Text front end: a small precedence-climbing parser and the declaration workspace.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := '-' unary | factor
    factor := base ('^' ['-'] integer | '^' '(' ['-'] integer ')')?
    base   := number | identifier | derivative | call | '(' expr ')'

A derivative is ``u_xxy`` (the subscript letters are independent-variable
names, order-insensitive).  ``xi_xu`` denotes a partial derivative of a
declared ansatz function.  Calls apply a declared opaque function to one
argument.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .expr import (
    BUILTIN_FUNCTIONS,
    Atom,
    Expr,
    Fn,
    Function,
    Jet,
    MultiIndex,
    Num,
    add,
    mul,
    neg,
    power,
    weierstrass_functions,
)


class ParseError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int = 0):
        self.text = text
        self.pos = pos
        where = f" at position {pos}" if text else ""
        super().__init__(f"{message}{where}" + (f": {text!r}" if text else ""))


@dataclass
class Workspace:
    """Names an expression may use.

    ``constants`` are atoms with vanishing derivatives; ``aliases`` are named
    expressions substituted while parsing (used for invariant names).
    """

    independent: tuple[str, ...] = ("x", "y")
    dependent: tuple[str, ...] = ("u",)
    constants: tuple[str, ...] = ()
    functions: dict[str, Function] = field(default_factory=lambda: dict(BUILTIN_FUNCTIONS))
    ansatz: tuple[str, ...] = ()
    aliases: dict[str, Expr] = field(default_factory=dict)

    def __post_init__(self):
        self.independent = tuple(self.independent)
        self.constants = tuple(self.constants)
        names = list(self.independent) + list(self.dependent) + list(self.constants) + list(self.ansatz)
        dup = {n for n in names if names.count(n) > 1}
        if dup:
            raise ValueError(f"names declared twice: {sorted(dup)}")
        for v in self.independent:
            if len(v) != 1:
                raise ValueError("independent variables must be single letters")
        if "g3" in self.constants and "wp" not in self.functions:
            c3 = Atom("c3", "constant") if "c3" in self.constants else None
            self.functions.update(weierstrass_functions(Atom("g3", "constant"), c3))

    def var(self, name: str) -> Atom:
        if name not in self.independent:
            raise KeyError(name)
        return Atom(name, "independent")

    def const(self, name: str) -> Atom:
        if name not in self.constants:
            raise KeyError(name)
        return Atom(name, "constant")

    def with_aliases(self, aliases: Mapping[str, Expr]) -> "Workspace":
        ws = Workspace(self.independent, self.dependent, self.constants, dict(self.functions),
                       self.ansatz, {**self.aliases, **aliases})
        return ws

    def with_constants(self, names: Iterable[str]) -> "Workspace":
        extra = tuple(n for n in names if n not in self.constants)
        return Workspace(self.independent, self.dependent, self.constants + extra,
                         dict(self.functions), self.ansatz, dict(self.aliases))


DEFAULT = Workspace()

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z][A-Za-z0-9]*(?:_[A-Za-z]+)?)|(?P<op>[-+*/^()]))")


def _tokens(text: str):
    pos = 0
    out = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            pos += len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError("unexpected character", text, pos)
        kind = m.lastgroup
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, ws: Workspace):
        self.text = text
        self.ws = ws
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, value: Optional[str] = None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r}", self.text, tok[2])
        self.i += 1
        return tok

    def parse(self) -> Expr:
        if self.peek()[0] == "end":
            raise ParseError("empty expression", self.text, 0)
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", self.text, tok[2])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            t = self.term()
            e = add(e, t) if op == "+" else add(e, neg(t))
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            f = self.unary()
            e = mul(e, f) if op == "*" else mul(e, power(f, -1))
        return e

    def unary(self) -> Expr:
        if self.peek()[1] == "-":
            self.take()
            return neg(self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.factor()

    def factor(self) -> Expr:
        b = self.base()
        if self.peek()[1] == "^":
            self.take()
            paren = self.peek()[1] == "("
            if paren:
                self.take()
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            kind, val, pos = self.take()
            if kind != "num":
                raise ParseError("exponent must be an integer", self.text, pos)
            if paren:
                self.take(")")
            n = sign * int(val)
            if n == 0:
                from .expr import ONE
                return ONE
            try:
                return power(b, n)
            except ZeroDivisionError:
                raise ParseError("zero raised to a negative power", self.text, pos) from None
        return b

    def base(self) -> Expr:
        kind, val, pos = self.take()
        if kind == "num":
            return Num(int(val))
        if val == "(":
            e = self.expr()
            self.take(")")
            return e
        if kind == "name":
            if self.peek()[1] == "(" and val in self.ws.functions:
                self.take("(")
                arg = self.expr()
                self.take(")")
                return self.ws.functions[val](arg)
            return self.identifier(val, pos)
        raise ParseError(f"unexpected {val!r}", self.text, pos)

    def identifier(self, name: str, pos: int) -> Expr:
        ws = self.ws
        if "_" in name:
            head, sub = name.split("_", 1)
            if head in ws.dependent:
                bad = [c for c in sub if c not in ws.independent]
                if bad:
                    raise ParseError(f"malformed derivative subscript {sub!r}", self.text, pos)
                return Jet(head, MultiIndex(sub))
            if head in ws.ansatz:
                allowed = set(ws.independent) | set(ws.dependent)
                if any(c not in allowed for c in sub):
                    raise ParseError(f"malformed derivative subscript {sub!r}", self.text, pos)
                return Fn(head, MultiIndex(sub), "".join(ws.independent + ws.dependent))
            if name in ws.aliases:
                return ws.aliases[name]
            raise ParseError(f"undeclared identifier {name!r}", self.text, pos)
        if name in ws.aliases:
            return ws.aliases[name]
        if name in ws.independent:
            return Atom(name, "independent")
        if name in ws.dependent:
            return Jet(name)
        if name in ws.constants:
            return Atom(name, "constant")
        if name in ws.ansatz:
            return Fn(name, MultiIndex(), "".join(ws.independent + ws.dependent))
        if name in ws.functions:
            raise ParseError(f"function {name!r} needs an argument", self.text, pos)
        raise ParseError(f"undeclared identifier {name!r}", self.text, pos)


def parse(text: str, workspace: Workspace = DEFAULT) -> Expr:
    """Parse ``text`` against the names declared in ``workspace``."""
    return _Parser(text, workspace).parse()


def parse_jet(text: str, workspace: Workspace = DEFAULT) -> Jet:
    e = parse(text, workspace)
    if not isinstance(e, Jet):
        raise ParseError("expected a jet variable such as u_xy", text, 0)
    return e


def parse_index(text: str) -> MultiIndex:
    """Multi-index text form: ``xxy``; ``-``, ``0`` or empty for the empty index."""
    text = text.strip()
    if text in ("", "-", "0"):
        return MultiIndex()
    if not text.isalpha():
        raise ParseError("multi-index must be a letter string", text, 0)
    return MultiIndex(text)
