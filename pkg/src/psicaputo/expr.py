"""Arithmetic expression language used in problem configuration files.

Grammar (lowest to highest binding)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | "+" unary | power
    power  := atom ("^" unary)?          # right-associative
    atom   := number | name | name "(" args ")" | "(" expr ")"

Evaluation works on floats and on numpy arrays alike, so a parsed tree can
be applied to a whole grid at once.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from . import special

__all__ = [
    "ExprError",
    "LexError",
    "ParseError",
    "ArityError",
    "UnboundVariable",
    "EvalError",
    "Token",
    "Const",
    "Var",
    "Unary",
    "Binary",
    "Call",
    "FUNCTIONS",
    "CONSTANTS",
    "tokenize",
    "parse",
    "parse_expression",
    "evaluate",
    "to_source",
    "free_variables",
    "compile_expression",
]


class ExprError(ValueError):
    pass


class LexError(ExprError):
    def __init__(self, position: int, message: str = "unexpected character"):
        super().__init__(f"{message} at position {position}")
        self.position = position


class ParseError(ExprError):
    def __init__(self, position: int, expected: tuple[str, ...], found: str = ""):
        what = f"found {found!r}" if found else "found end of input"
        super().__init__(
            f"expected one of {', '.join(expected)} at position {position}, {what}"
        )
        self.position = position
        self.expected = expected


class ArityError(ExprError):
    def __init__(self, name: str, expected: int, got: int, position: int):
        super().__init__(
            f"{name}() takes {expected} argument(s), got {got} (position {position})"
        )
        self.name = name
        self.position = position


class UnboundVariable(ExprError):
    def __init__(self, name: str):
        super().__init__(f"unbound variable {name!r}")
        self.name = name


class EvalError(ExprError):
    pass


# --------------------------------------------------------------------- lexing

@dataclass(frozen=True)
class Token:
    kind: str  # number, identifier, operator, lparen, rparen, comma
    lexeme: str
    position: int


_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_SINGLE = {"+": "operator", "-": "operator", "*": "operator", "/": "operator",
           "^": "operator", "(": "lparen", ")": "rparen", ",": "comma"}


def tokenize(source: str) -> list[Token]:
    if not source or source.isspace():
        raise LexError(0, "empty expression")
    tokens: list[Token] = []
    i = 0
    while i < len(source):
        c = source[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < len(source) and source[i + 1].isdigit()):
            m = _NUMBER.match(source, i)
            end = m.end()
            # "2..5", "1.2.3", "3x" and the like are malformed numbers
            if end < len(source) and (source[end] == "." or source[end].isalnum()
                                      or source[end] == "_"):
                raise LexError(end, "malformed number")
            if not math.isfinite(float(m.group())):
                raise LexError(i, "number out of range")
            tokens.append(Token("number", m.group(), i))
            i = end
            continue
        m = _IDENT.match(source, i)
        if m:
            tokens.append(Token("identifier", m.group(), i))
            i = m.end()
            continue
        if c in _SINGLE:
            tokens.append(Token(_SINGLE[c], c, i))
            i += 1
            continue
        raise LexError(i)
    return tokens


# ---------------------------------------------------------------------- trees

@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    child: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Node", ...]


Node = Union[Const, Var, Unary, Binary, Call]

FUNCTIONS: dict[str, int] = {
    "gamma": 1,
    "mlf": 2,
    "exp": 1,
    "ln": 1,
    "sin": 1,
    "cos": 1,
    "sqrt": 1,
    "abs": 1,
    "pow": 2,
}

CONSTANTS: dict[str, float] = {"pi": math.pi}


# -------------------------------------------------------------------- parsing

class _Parser:
    def __init__(self, tokens: list[Token], source_length: int):
        self.tokens = tokens
        self.i = 0
        self.end = source_length

    def peek(self) -> Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected: tuple[str, ...]):
        tok = self.peek()
        if tok is None:
            raise ParseError(self.end, expected)
        raise ParseError(tok.position, expected, tok.lexeme)

    def at_op(self, ops: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "operator" and tok.lexeme in ops

    def expr(self) -> Node:
        node = self.term()
        while self.at_op("+-"):
            op = self.next().lexeme
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.at_op("*/"):
            op = self.next().lexeme
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.at_op("+-"):
            op = self.next().lexeme
            return Unary(op, self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.at_op("^"):
            self.next()
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Node:
        tok = self.peek()
        if tok is None:
            self.fail(("number", "identifier", "("))
        if tok.kind == "number":
            self.next()
            return Const(float(tok.lexeme))
        if tok.kind == "lparen":
            self.next()
            node = self.expr()
            self.expect("rparen", ")")
            return node
        if tok.kind == "identifier":
            self.next()
            nxt = self.peek()
            if nxt is not None and nxt.kind == "lparen":
                return self.call(tok)
            return Var(tok.lexeme)
        self.fail(("number", "identifier", "("))

    def call(self, name_tok: Token) -> Node:
        name = name_tok.lexeme
        if name not in FUNCTIONS:
            raise ParseError(name_tok.position, tuple(sorted(FUNCTIONS)), name)
        self.next()  # "("
        args: list[Node] = []
        tok = self.peek()
        if tok is not None and tok.kind == "rparen":
            self.next()
        else:
            args.append(self.expr())
            while True:
                tok = self.peek()
                if tok is not None and tok.kind == "comma":
                    self.next()
                    args.append(self.expr())
                    continue
                self.expect("rparen", ")", also=(",",))
                break
        if len(args) != FUNCTIONS[name]:
            raise ArityError(name, FUNCTIONS[name], len(args), name_tok.position)
        return Call(name, tuple(args))

    def expect(self, kind: str, lexeme: str, also: tuple[str, ...] = ()):
        tok = self.peek()
        if tok is None or tok.kind != kind:
            self.fail((lexeme,) + also)
        self.next()


def parse(tokens: list[Token], source_length: int | None = None) -> Node:
    if not tokens:
        raise ParseError(0, ("number", "identifier", "("))
    if source_length is None:
        last = tokens[-1]
        source_length = last.position + len(last.lexeme)
    p = _Parser(tokens, source_length)
    node = p.expr()
    if p.peek() is not None:
        p.fail(("operator", "end of input"))
    return node


def parse_expression(source: str) -> Node:
    return parse(tokenize(source), len(source))


# ----------------------------------------------------------------- evaluation

def _finite(value, what: str):
    if not np.all(np.isfinite(value)):
        raise EvalError(f"{what} produced a non-finite value")
    return value


def _pow(base, exponent):
    base = np.asarray(base, dtype=float)
    exponent = np.asarray(exponent, dtype=float)
    integral = exponent == np.round(exponent)
    if np.any((base < 0) & ~integral):
        raise EvalError("negative base with non-integer exponent")
    if np.any((base == 0) & (exponent < 0)):
        raise EvalError("zero raised to a negative power")
    with np.errstate(over="ignore", invalid="ignore"):
        return _finite(np.power(base, exponent), "power")


def _div(num, den):
    if np.any(np.asarray(den) == 0):
        raise EvalError("division by zero")
    with np.errstate(over="ignore"):
        return _finite(np.divide(num, den), "division")


def _ln(arg):
    if np.any(np.asarray(arg) <= 0):
        raise EvalError("logarithm of a non-positive number")
    return np.log(arg)


def _sqrt(arg):
    if np.any(np.asarray(arg) < 0):
        raise EvalError("square root of a negative number")
    return np.sqrt(arg)


def _exp(arg):
    with np.errstate(over="ignore"):
        return _finite(np.exp(arg), "exp")


def _gamma(arg):
    try:
        if np.ndim(arg) == 0:
            return special.gamma(float(arg))
        return np.vectorize(special.gamma, otypes=[float])(arg)
    except special.PoleError as exc:
        raise EvalError(str(exc)) from None


def _mlf(alpha, z):
    if np.ndim(alpha) != 0:
        alpha = np.asarray(alpha)
        if np.any(alpha != alpha.flat[0]):
            raise EvalError("mlf order must be the same at every point")
        alpha = float(alpha.flat[0])
    try:
        return special.mittag_leffler(float(alpha), z)
    except (ValueError, special.NoConvergence) as exc:
        raise EvalError(str(exc)) from None


_IMPL = {
    "gamma": _gamma,
    "mlf": _mlf,
    "exp": _exp,
    "ln": _ln,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": _sqrt,
    "abs": np.abs,
    "pow": _pow,
}


def _eval(node: Node, env: Mapping[str, object]):
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        if node.name in env:
            return env[node.name]
        if node.name in CONSTANTS:
            return CONSTANTS[node.name]
        raise UnboundVariable(node.name)
    if isinstance(node, Unary):
        value = _eval(node.child, env)
        return -value if node.op == "-" else value
    if isinstance(node, Binary):
        left = _eval(node.left, env)
        right = _eval(node.right, env)
        if node.op == "+":
            return np.add(left, right)
        if node.op == "-":
            return np.subtract(left, right)
        if node.op == "*":
            with np.errstate(over="ignore"):
                return _finite(np.multiply(left, right), "multiplication")
        if node.op == "/":
            return _div(left, right)
        return _pow(left, right)
    if isinstance(node, Call):
        return _IMPL[node.name](*(_eval(arg, env) for arg in node.args))
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node: Node, bindings: Mapping[str, object] | None = None):
    """Evaluate ``node`` with the given variable bindings.

    Bindings may be floats or numpy arrays (broadcast together). A float
    comes back when every binding is scalar.
    """
    env = dict(bindings or {})
    scalar = all(np.ndim(v) == 0 for v in env.values())
    with np.errstate(divide="raise", invalid="raise"):
        try:
            value = _eval(node, env)
        except FloatingPointError as exc:
            raise EvalError(str(exc)) from None
    value = _finite(value, "expression")
    if scalar:
        return float(value)
    return np.asarray(value, dtype=float)


def free_variables(node: Node) -> set[str]:
    if isinstance(node, Var):
        return set() if node.name in CONSTANTS else {node.name}
    if isinstance(node, Unary):
        return free_variables(node.child)
    if isinstance(node, Binary):
        return free_variables(node.left) | free_variables(node.right)
    if isinstance(node, Call):
        out: set[str] = set()
        for arg in node.args:
            out |= free_variables(arg)
        return out
    return set()


# ------------------------------------------------------------ pretty-printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "unary": 3, "^": 4}
_ATOM = 5


def _prec(node: Node) -> int:
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary):
        return _PREC["unary"]
    return _ATOM


def _wrap(node: Node, needs_parens: bool) -> str:
    text = to_source(node)
    return f"({text})" if needs_parens else text


def to_source(node: Node) -> str:
    """Render a tree as text that parses back to the same tree."""
    if isinstance(node, Const):
        if node.value < 0 or not math.isfinite(node.value):
            raise ValueError(f"constant {node.value!r} has no literal form")
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_source(a) for a in node.args)})"
    if isinstance(node, Unary):
        return node.op + _wrap(node.child, _prec(node.child) < _PREC["unary"])
    p = _PREC[node.op]
    if node.op == "^":
        left = _wrap(node.left, _prec(node.left) <= p)
        right = _wrap(node.right, _prec(node.right) < _PREC["unary"])
        return f"{left}^{right}"
    left = _wrap(node.left, _prec(node.left) < p)
    right = _wrap(node.right, _prec(node.right) <= p)
    return f"{left} {node.op} {right}"


# ------------------------------------------------------------------- helpers

@dataclass(frozen=True)
class CompiledExpression:
    """A parsed expression together with its source text."""

    source: str
    tree: Node

    def __call__(self, **bindings):
        return evaluate(self.tree, bindings)

    @property
    def variables(self) -> set[str]:
        return free_variables(self.tree)


def compile_expression(source: str, allowed: set[str] | None = None) -> CompiledExpression:
    tree = parse_expression(source)
    if allowed is not None:
        extra = free_variables(tree) - allowed
        if extra:
            raise UnboundVariable(sorted(extra)[0])
    return CompiledExpression(source, tree)
