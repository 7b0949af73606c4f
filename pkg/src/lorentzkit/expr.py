"""Scalar expression parser and second-order jet evaluator.

Expressions are written over a chart's symbol table (coordinate names plus
named parameters). Grammar is ordinary infix:

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?            -- right associative
    atom   := number | symbol | func '(' expr ')' | '(' expr ')'

with functions exp, log, sin, cos, tan, sinh, cosh, tanh, sqrt. `abs` is
deliberately not provided (not twice differentiable at 0). The parsed tree is
immutable; evaluation propagates Jet2 values, so gradients and Hessians are
analytic.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError, ExprSyntaxError, UnknownSymbol
from .jets import Jet2

FUNCTIONS = ("exp", "log", "sin", "cos", "tan", "sinh", "cosh", "tanh", "sqrt")


# --- AST ---------------------------------------------------------------------

class Expr:
    """Base node. Subclasses are frozen dataclasses; trees are immutable."""

    def eval2(self, point_jets: Sequence[Jet2],
              param_values: Mapping[str, float], n: int) -> Jet2:
        raise NotImplementedError

    def evalf(self, point: Sequence[float],
              param_values: Mapping[str, float]) -> float:
        """Value-only evaluation (no derivatives); cheap path for hot loops."""
        raise NotImplementedError

    @property
    def is_constant(self) -> bool:
        raise NotImplementedError

    def symbols(self) -> set[str]:
        raise NotImplementedError


@dataclass(frozen=True)
class Num(Expr):
    value: float

    def eval2(self, point_jets, param_values, n):
        return Jet2.constant(self.value, n)

    def evalf(self, point, param_values):
        return self.value

    @property
    def is_constant(self):
        return True

    def symbols(self):
        return set()


@dataclass(frozen=True)
class Sym(Expr):
    name: str
    coord_index: int | None   # None for parameters

    def eval2(self, point_jets, param_values, n):
        if self.coord_index is not None:
            return point_jets[self.coord_index]
        return Jet2.constant(param_values[self.name], n)

    def evalf(self, point, param_values):
        if self.coord_index is not None:
            return float(point[self.coord_index])
        return float(param_values[self.name])

    @property
    def is_constant(self):
        return self.coord_index is None

    def symbols(self):
        return {self.name}


_MATH_FUNCS = {
    "exp": math.exp, "log": math.log, "sin": math.sin, "cos": math.cos,
    "tan": math.tan, "sinh": math.sinh, "cosh": math.cosh, "tanh": math.tanh,
    "sqrt": math.sqrt,
}


@dataclass(frozen=True)
class Unary(Expr):
    op: str             # 'neg' or a function name
    arg: Expr

    def eval2(self, point_jets, param_values, n):
        a = self.arg.eval2(point_jets, param_values, n)
        if self.op == "neg":
            return -a
        return getattr(a, self.op)()

    def evalf(self, point, param_values):
        a = self.arg.evalf(point, param_values)
        if self.op == "neg":
            return -a
        try:
            return _MATH_FUNCS[self.op](a)
        except ValueError as exc:
            raise DomainError(f"{self.op}({a}): {exc}") from exc

    @property
    def is_constant(self):
        return self.arg.is_constant

    def symbols(self):
        return self.arg.symbols()


@dataclass(frozen=True)
class Binary(Expr):
    op: str             # '+', '-', '*', '/', '^'
    left: Expr
    right: Expr

    def eval2(self, point_jets, param_values, n):
        a = self.left.eval2(point_jets, param_values, n)
        if self.op == "^":
            # keep integer exponents exact (repeated multiplication)
            if isinstance(self.right, Num) and float(self.right.value).is_integer():
                return a ** int(self.right.value)
            b = self.right.eval2(point_jets, param_values, n)
            if b.grad.any() or b.hess.any():
                return (a.log() * b).exp()
            if float(b.value).is_integer():
                return a ** int(b.value)
            return a ** float(b.value)
        b = self.right.eval2(point_jets, param_values, n)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return a / b

    def evalf(self, point, param_values):
        a = self.left.evalf(point, param_values)
        b = self.right.evalf(point, param_values)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            if b == 0.0:
                raise DomainError("division by zero")
            return a / b
        if float(b).is_integer():
            return a ** int(b)
        if a <= 0.0:
            raise DomainError(f"real exponent requires positive base, got {a}")
        return a ** b

    @property
    def is_constant(self):
        return self.left.is_constant and self.right.is_constant

    def symbols(self):
        return self.left.symbols() | self.right.symbols()


# --- tokenizer ----------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<num>\d+(\.\d*)?([eE][+-]?\d+)?|\.\d+([eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*(\^\d+)?)
  | (?P<op>[-+*/^()])
  | (?P<ws>\s+)
""", re.VERBOSE)
# Note: identifiers like x^1 are allowed as coordinate names when declared in
# the symbol table; the tokenizer only fuses ident^digits when that exact
# spelling is a declared symbol (see _tokenize).


@dataclass(frozen=True)
class _Token:
    kind: str   # 'num' | 'ident' | 'op' | 'end'
    text: str
    pos: int


def _tokenize(text: str, declared: set[str]) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ExprSyntaxError(i, f"unexpected character {text[i]!r}")
        kind = m.lastgroup
        tok = m.group()
        if kind == "ws":
            i = m.end()
            continue
        if kind == "ident" and "^" in tok and tok not in declared:
            # not a declared caret-name: split back into ident + '^' + digits
            base = tok.split("^", 1)[0]
            tokens.append(_Token("ident", base, i))
            i += len(base)
            continue
        tokens.append(_Token(kind, tok, i))
        i = m.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


# --- parser --------------------------------------------------------------------

class SymbolTable:
    """Declared names for one chart: ordered coordinates plus parameter names."""

    def __init__(self, coordinates: Sequence[str],
                 parameters: Sequence[str] = ()):
        if not coordinates:
            raise ValueError("symbol table needs at least one coordinate")
        dupes = set(coordinates) & set(parameters)
        if dupes:
            raise ValueError(f"names declared twice: {sorted(dupes)}")
        self.coordinates = tuple(coordinates)
        self.parameters = tuple(parameters)
        self.coord_index = {c: i for i, c in enumerate(coordinates)}

    @property
    def dim(self) -> int:
        return len(self.coordinates)

    def all_names(self) -> set[str]:
        return set(self.coordinates) | set(self.parameters)


class _Parser:
    def __init__(self, tokens: list[_Token], table: SymbolTable):
        self.tokens = tokens
        self.table = table
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect_op(self, op: str):
        t = self.advance()
        if t.kind != "op" or t.text != op:
            raise ExprSyntaxError(t.pos, f"expected {op!r}")

    def parse(self) -> Expr:
        e = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ExprSyntaxError(t.pos, f"unexpected {t.text!r}")
        return e

    def expr(self) -> Expr:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.advance()
            return Unary("neg", self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        t = self.peek()
        if t.kind == "op" and t.text == "^":
            self.advance()
            # right associative; exponent binds tighter than unary minus
            # in `a^-b`, so allow a signed exponent here
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        t = self.advance()
        if t.kind == "num":
            return Num(float(t.text))
        if t.kind == "ident":
            if t.text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Unary(t.text, arg)
            if t.text == "abs":
                raise ExprSyntaxError(t.pos, "abs is not supported "
                                      "(not twice differentiable at 0)")
            idx = self.table.coord_index.get(t.text)
            if idx is None and t.text not in self.table.parameters:
                raise UnknownSymbol(t.text)
            return Sym(t.text, idx)
        if t.kind == "op" and t.text == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ExprSyntaxError(t.pos, f"unexpected {t.text or 'end of input'!r}")


def parse(text: str, table: SymbolTable) -> Expr:
    """Parse `text` against a chart symbol table.

    Raises ExprSyntaxError on malformed input and UnknownSymbol for
    undeclared identifiers.
    """
    tokens = _tokenize(text, table.all_names())
    return _Parser(tokens, table).parse()


def eval2(e: Expr, point: Sequence[float],
          params: Mapping[str, float] | None = None,
          table: SymbolTable | None = None) -> Jet2:
    """Evaluate an expression as a second-order jet at a chart point.

    The gradient/Hessian are with respect to the chart coordinates, in the
    order declared by the symbol table used at parse time.
    """
    point = np.asarray(point, dtype=float)
    n = point.shape[0]
    if table is not None and table.dim != n:
        raise ValueError(f"point dimension {n} != chart dimension {table.dim}")
    seeds = [Jet2.variable(point[i], i, n) for i in range(n)]
    jet = e.eval2(seeds, params or {}, n)
    return jet.symmetrized()
