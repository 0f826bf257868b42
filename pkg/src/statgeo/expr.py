"""Scalar expressions in x1..xn with exact second-order forward-mode jets.

Grammar (highest precedence first)::

    primary := NUMBER | xK | pi | NAME '(' expr ')' | '(' expr ')'
    power   := primary ('^' unary)?          # right associative
    unary   := ('-' | '+') unary | power
    term    := unary (('*' | '/') unary)*
    expr    := term (('+' | '-') term)*

so ``-x1^2`` is ``-(x1^2)`` and ``2^-1`` is ``0.5``.  ``**`` is accepted as an
alias for ``^``.

Kinked functions follow one-sided conventions: ``heaviside(0) = 1``,
``sgn(0) = 0`` and ``abs`` has zero first and second derivative at 0.  Any
evaluation landing exactly on a kink (or on a point where a root or ``asin``
has an infinite derivative) sets ``Jet2.nonsmooth``.

A product with a ``heaviside`` factor that evaluates to 0 is the zero jet and
the other factor is not evaluated.  The step is 0 only on an open set, so the
product vanishes identically nearby; this lets piecewise definitions such as
``sqrt(1 - x1^2) * heaviside(1 - x1^2)`` be evaluated outside the root's domain.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .errors import (
    DomainError,
    ExpressionSyntaxError,
    UnknownIdentifier,
    VariableOutOfRange,
)

__all__ = [
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "Expression",
    "Jet2",
    "parse",
    "eval_jet2",
    "evaluate",
    "to_source",
    "FUNCTIONS",
]


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based, as written in the source


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"


Node = Union[Const, Var, Neg, BinOp, Call]

FUNCTIONS = (
    "exp", "log", "sqrt", "cbrt", "abs", "sgn", "heaviside", "asin", "sin", "cos",
)


@dataclass(frozen=True)
class Expression:
    """Parsed expression: an immutable AST plus its declared dimension."""

    root: Node
    n: int
    source: str = ""

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def jet(self, x) -> "Jet2":
        return eval_jet2(self, x)

    def __str__(self) -> str:
        return to_source(self.root)


# --------------------------------------------------------------------------
# tokenizer / parser

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),])
    """,
    re.VERBOSE,
)
_VAR_RE = re.compile(r"x([1-9][0-9]*)$")


class _Parser:
    def __init__(self, source: str, n: int, constants: Mapping[str, float]):
        self.source = source
        self.n = n
        self.constants = {"pi": math.pi, **constants}
        self.tokens = self._tokenize(source)
        self.pos = 0

    @staticmethod
    def _tokenize(source):
        tokens = []
        i = 0
        while i < len(source):
            m = _TOKEN_RE.match(source, i)
            if m is None:
                raise ExpressionSyntaxError(
                    f"unexpected character {source[i]!r}", i, "a number, name or operator"
                )
            kind = m.lastgroup
            if kind != "ws":
                text = m.group(kind)
                if text == "**":
                    text = "^"
                tokens.append((kind, text, i))
            i = m.end()
        tokens.append(("end", "", len(source)))
        return tokens

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, text):
        kind, tok, off = self.peek()
        if tok != text or kind == "end":
            found = "end of input" if kind == "end" else repr(tok)
            raise ExpressionSyntaxError(f"unexpected {found}", off, repr(text))
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        kind, tok, off = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {tok!r}", off, "operator or end of input")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        kind, tok, _ = self.peek()
        if kind == "op" and tok in ("-", "+"):
            self.advance()
            operand = self.unary()
            if tok == "+":
                return operand
            if isinstance(operand, Const):
                return Const(-operand.value)
            return Neg(operand)
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def primary(self):
        kind, tok, off = self.advance()
        if kind == "num":
            return Const(float(tok))
        if kind == "name":
            m = _VAR_RE.match(tok)
            if m:
                idx = int(m.group(1))
                if idx > self.n:
                    raise VariableOutOfRange(
                        f"variable {tok} at offset {off} exceeds dimension n={self.n}"
                    )
                return Var(idx)
            if tok in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(tok, arg)
            if tok in self.constants:
                return Const(float(self.constants[tok]))
            raise UnknownIdentifier(f"unknown identifier {tok!r} at offset {off}")
        if kind == "op" and tok == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(tok)
        raise ExpressionSyntaxError(f"unexpected {found}", off, "a number, variable, function or '('")


def parse(source: str, n: int, constants: Mapping[str, float] | None = None) -> Expression:
    """Parse ``source`` into an :class:`Expression` over ``x1..xn``.

    ``constants`` binds extra names (e.g. ``{"e": 0.1}``) to numeric literals.
    """
    if not source or not source.strip():
        raise ExpressionSyntaxError("empty expression", 0, "an expression")
    if n < 1:
        raise ValueError("dimension n must be >= 1")
    root = _Parser(source, n, constants or {}).parse()
    return Expression(root, n, source)


def to_source(node: Node) -> str:
    """Canonical, fully parenthesised source.

    ``parse(to_source(e))`` evaluates like ``e``; negated literals are folded,
    so the text is a fixed point after one round trip.
    """
    if isinstance(node, Const):
        text = repr(float(node.value))
        return f"({text})" if node.value < 0 or text.startswith("-") else text
    if isinstance(node, Var):
        return f"x{node.index}"
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({to_source(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# --------------------------------------------------------------------------
# jets


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and Hessian of a scalar function at a point."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    nonsmooth: bool = False


class _J:
    # mutable-free working jet; only used inside evaluation
    __slots__ = ("v", "g", "h", "ns")

    def __init__(self, v, g, h, ns=False):
        self.v = v
        self.g = g
        self.h = h
        self.ns = ns


def _const(v, n):
    return _J(float(v), np.zeros(n), np.zeros((n, n)))


def _chain(u: _J, f0, f1, f2, ns=False) -> _J:
    # f(u): value f0, f'(u)=f1, f''(u)=f2
    return _J(f0, f1 * u.g, f1 * u.h + f2 * np.outer(u.g, u.g), u.ns or ns)


def _add(a, b, sign=1.0):
    return _J(a.v + sign * b.v, a.g + sign * b.g, a.h + sign * b.h, a.ns or b.ns)


def _mul(a, b):
    cross = np.outer(a.g, b.g)
    return _J(
        a.v * b.v,
        a.v * b.g + b.v * a.g,
        a.v * b.h + b.v * a.h + (cross + cross.T),
        a.ns or b.ns,
    )


def _reciprocal(u):
    if u.v == 0.0:
        raise DomainError("division by zero")
    return _chain(u, 1.0 / u.v, -1.0 / u.v**2, 2.0 / u.v**3)


def _is_integer(c):
    return float(c).is_integer()


def _power_const(u, c):
    x = u.v
    if c == 0.0:
        return _const(1.0, u.g.size)
    if x < 0.0 and not _is_integer(c):
        raise DomainError(f"negative base {x!r} raised to non-integer power {c!r}")
    if x == 0.0:
        if c < 0.0:
            raise DomainError("zero raised to a negative power")
        if _is_integer(c):
            f1 = 1.0 if c == 1.0 else 0.0
            f2 = 2.0 if c == 2.0 else 0.0
            return _chain(u, 0.0, f1, f2)
        f1 = 1.0 if c == 1.0 else (0.0 if c > 1.0 else math.inf)
        f2 = 0.0 if c > 2.0 else math.inf
        return _chain(u, 0.0, f1, f2, ns=c < 2.0)
    return _chain(u, x**c, c * x ** (c - 1.0), c * (c - 1.0) * x ** (c - 2.0))


def _cbrt(x):
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def _apply_function(name, u):
    x = u.v
    if name == "exp":
        e = math.exp(x)
        return _chain(u, e, e, e)
    if name == "log":
        if x <= 0.0:
            raise DomainError(f"log of non-positive value {x!r}")
        return _chain(u, math.log(x), 1.0 / x, -1.0 / x**2)
    if name == "sqrt":
        if x < 0.0:
            raise DomainError(f"sqrt of negative value {x!r}")
        if x == 0.0:
            return _chain(u, 0.0, math.inf, -math.inf, ns=True)
        r = math.sqrt(x)
        return _chain(u, r, 0.5 / r, -0.25 / (r * x))
    if name == "cbrt":
        if x == 0.0:
            return _chain(u, 0.0, math.inf, -math.inf, ns=True)
        r = _cbrt(x)
        return _chain(u, r, 1.0 / (3.0 * r * r), -2.0 / (9.0 * r * r * x))
    if name == "abs":
        return _chain(u, abs(x), math.copysign(1.0, x) if x != 0.0 else 0.0, 0.0, ns=x == 0.0)
    if name == "sgn":
        s = 0.0 if x == 0.0 else math.copysign(1.0, x)
        return _chain(u, s, 0.0, 0.0, ns=x == 0.0)
    if name == "heaviside":
        return _chain(u, 1.0 if x >= 0.0 else 0.0, 0.0, 0.0, ns=x == 0.0)
    if name == "asin":
        if abs(x) > 1.0:
            raise DomainError(f"asin of {x!r} outside [-1, 1]")
        if abs(x) == 1.0:
            return _chain(u, math.asin(x), math.inf, math.copysign(math.inf, x), ns=True)
        q = (1.0 - x) * (1.0 + x)  # factored to keep precision near |x| = 1
        return _chain(u, math.asin(x), 1.0 / math.sqrt(q), x / q**1.5)
    if name == "sin":
        s, c = math.sin(x), math.cos(x)
        return _chain(u, s, c, -s)
    if name == "cos":
        s, c = math.sin(x), math.cos(x)
        return _chain(u, c, -s, -c)
    raise UnknownIdentifier(f"unknown function {name!r}")


def _is_off_step(node, x, n):
    if isinstance(node, Call) and node.name == "heaviside":
        return _eval(node.arg, x, n).v < 0.0
    return False


def _eval(node, x, n) -> _J:
    if isinstance(node, Const):
        return _const(node.value, n)
    if isinstance(node, Var):
        g = np.zeros(n)
        g[node.index - 1] = 1.0
        return _J(float(x[node.index - 1]), g, np.zeros((n, n)))
    if isinstance(node, Neg):
        u = _eval(node.operand, x, n)
        return _J(-u.v, -u.g, -u.h, u.ns)
    if isinstance(node, Call):
        return _apply_function(node.name, _eval(node.arg, x, n))
    if isinstance(node, BinOp):
        op = node.op
        if op == "*" and (_is_off_step(node.left, x, n) or _is_off_step(node.right, x, n)):
            return _const(0.0, n)
        a = _eval(node.left, x, n)
        if op == "^" and isinstance(node.right, Const):
            return _power_const(a, node.right.value)
        b = _eval(node.right, x, n)
        if op == "+":
            return _add(a, b)
        if op == "-":
            return _add(a, b, -1.0)
        if op == "*":
            return _mul(a, b)
        if op == "/":
            return _mul(a, _reciprocal(b))
        if op == "^":
            if not b.g.any() and not b.h.any():
                return _power_const(a, b.v)
            if a.v <= 0.0:
                raise DomainError("variable exponent requires a positive base")
            return _apply_function("exp", _mul(b, _apply_function("log", a)))
    raise TypeError(f"not an expression node: {node!r}")


def eval_jet2(e: Expression, x) -> Jet2:
    """Value, gradient and Hessian of ``e`` at ``x`` by forward-mode rules."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != e.n:
        raise ValueError(f"point has dimension {x.size}, expression expects {e.n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("evaluation point must be finite")
    # infinite derivatives at kinks meet zero factors; the nonsmooth flag covers them
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        j = _eval(e.root, x, e.n)
    return Jet2(j.v, j.g, j.h, j.ns)


def _value(node, x):
    # value-only evaluation; mirrors _eval conventions
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return float(x[node.index - 1])
    if isinstance(node, Neg):
        return -_value(node.operand, x)
    if isinstance(node, Call):
        u = _J(_value(node.arg, x), np.zeros(1), np.zeros((1, 1)))
        return _apply_function(node.name, u).v
    if isinstance(node, BinOp):
        op = node.op
        if op == "*":
            for side, other in ((node.left, node.right), (node.right, node.left)):
                if isinstance(side, Call) and side.name == "heaviside" and _value(side.arg, x) < 0.0:
                    return 0.0
        a = _value(node.left, x)
        b = _value(node.right, x)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0.0:
                raise DomainError("division by zero")
            return a / b
        if op == "^":
            u = _J(a, np.zeros(1), np.zeros((1, 1)))
            return _power_const(u, b).v if a <= 0.0 or float(b).is_integer() else a**b
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(e: Expression, x) -> float:
    """Value of ``e`` at ``x`` without derivatives."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != e.n:
        raise ValueError(f"point has dimension {x.size}, expression expects {e.n}")
    return float(_value(e.root, x))
