"""Scalar functions of time given as infix expressions.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right associative
    atom   := NUMBER | 't' | 'pi' | NAME '(' expr ')' | '(' expr ')'

``NAME`` is one of sin, cos, tan, exp, sqrt, abs.  Numbers are decimal with an
optional exponent (``1``, ``2.5``, ``.5``, ``3e-2``).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Union

from .errors import NonFiniteError, ParseError, UnknownIdentifierError

__all__ = ["TimeFn", "parse_timefn", "eval_timefn", "FUNCTIONS"]

FUNCTIONS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "sqrt": math.sqrt,
    "abs": abs,
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


# AST nodes -----------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"


Node = Union[Num, Var, Pi, Neg, BinOp, Call]


def _pow(a, b):
    return math.pow(a, b)


_BINOPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": lambda a, b: a / b,
    "^": _pow,
}


def _compile(node):
    """Turn an AST into a nested closure ``t -> float``."""
    if isinstance(node, Num):
        v = node.value
        return lambda t: v
    if isinstance(node, Var):
        return lambda t: t
    if isinstance(node, Pi):
        return lambda t: math.pi
    if isinstance(node, Neg):
        inner = _compile(node.operand)
        return lambda t: -inner(t)
    if isinstance(node, BinOp):
        fn = _BINOPS[node.op]
        lhs, rhs = _compile(node.left), _compile(node.right)
        return lambda t: fn(lhs(t), rhs(t))
    if isinstance(node, Call):
        fn = FUNCTIONS[node.name]
        arg = _compile(node.arg)
        return lambda t: fn(arg(t))
    raise TypeError(f"not an expression node: {node!r}")


def _unparse(node):
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "t"
    if isinstance(node, Pi):
        return "pi"
    if isinstance(node, Neg):
        return f"(-{_unparse(node.operand)})"
    if isinstance(node, BinOp):
        return f"({_unparse(node.left)} {node.op} {_unparse(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({_unparse(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


def _is_constant(node):
    if isinstance(node, (Num, Pi)):
        return True
    if isinstance(node, Var):
        return False
    if isinstance(node, Neg):
        return _is_constant(node.operand)
    if isinstance(node, BinOp):
        return _is_constant(node.left) and _is_constant(node.right)
    return _is_constant(node.arg)


@dataclass(frozen=True)
class TimeFn:
    """A parsed, immutable function of time.

    Instances are callable: ``f(t)`` is the same as ``eval_timefn(f, t)``.
    """

    source: str
    ast: Node
    _fn: Callable[[float], float] = field(repr=False, compare=False)

    def __call__(self, t):
        return eval_timefn(self, t)

    def unparse(self):
        """Fully parenthesised source that re-parses to an equivalent function."""
        return _unparse(self.ast)

    @property
    def is_constant(self):
        return _is_constant(self.ast)

    @property
    def is_zero(self):
        return isinstance(self.ast, Num) and self.ast.value == 0.0

    def __str__(self):
        return self.source


# Parser --------------------------------------------------------------------

class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = self._tokenize(text)
        self.pos = 0

    def _offset(self, char_index):
        return len(self.text[:char_index].encode("utf-8"))

    def _tokenize(self, text):
        tokens = []
        i = 0
        while i < len(text):
            m = _TOKEN_RE.match(text, i)
            if m is None:
                raise ParseError(f"unexpected character {text[i]!r}", self._offset(i))
            kind = m.lastgroup
            if kind != "ws":
                tokens.append((kind, m.group(), i))
            i = m.end()
        tokens.append(("end", "", len(text)))
        return tokens

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value):
        kind, text, at = self.advance()
        if text != value or kind != "op":
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", self._offset(at))

    def parse(self):
        node = self.expr()
        kind, text, at = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {text!r}", self._offset(at))
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
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, text, at = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text == "t":
                return Var()
            if text == "pi":
                return Pi()
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise UnknownIdentifierError(text, self._offset(at))
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"expected a number, name or '(', found {found}", self._offset(at))


def parse_timefn(text):
    """Parse an infix expression in ``t`` into a :class:`TimeFn`.

    Raises
    ------
    ParseError
        On syntax errors; ``offset`` points at the offending byte.
    UnknownIdentifierError
        For any name other than ``t``, ``pi`` or a supported function.
    """
    if isinstance(text, (int, float)):
        text = repr(float(text))
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    ast = _Parser(text).parse()
    return TimeFn(text, ast, _compile(ast))


def eval_timefn(f, t):
    """Evaluate ``f`` at time ``t`` in IEEE double precision.

    Raises :class:`NonFiniteError` for domain errors, division by zero,
    overflow, or any non-finite result.
    """
    try:
        value = f._fn(float(t))
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise NonFiniteError(f"{f.source!r} at t={t!r}: {exc}") from None
    if not math.isfinite(value):
        raise NonFiniteError(f"{f.source!r} at t={t!r}: non-finite result {value!r}")
    return value
