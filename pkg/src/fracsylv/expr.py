"""A small arithmetic language for problem definitions in config files.

Grammar (lowest to highest precedence)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative; -2^2 == -(2^2)
    atom   := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

Variables are ``t``, ``x`` and ``alpha``. Functions: ``exp ln sin cos sqrt
abs gamma`` (one argument) and ``uppergamma(s, x)``. Evaluation is
vectorized over numpy arrays and raises :class:`EvaluationError` when an
operation leaves its domain.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .exceptions import ConfigurationError, DomainError, FracSylvError
from .specfun import gamma_fn, upper_incomplete_gamma

__all__ = [
    "ParseError",
    "EvaluationError",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "parse",
    "evaluate",
    "to_text",
    "Expression",
]

VARIABLES = ("t", "x", "alpha")
FUNCTIONS = {
    "exp": 1,
    "ln": 1,
    "sin": 1,
    "cos": 1,
    "sqrt": 1,
    "abs": 1,
    "gamma": 1,
    "uppergamma": 2,
}


class ParseError(ConfigurationError):
    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}" + (f" in {text!r}" if text else ""))


class EvaluationError(FracSylvError, ArithmeticError):
    pass


@dataclass(frozen=True)
class Num:
    value: float
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Neg:
    operand: "Node"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple
    offset: int = field(default=0, compare=False)


Node = Union[Num, Var, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    pos = 0
    toks = []
    while True:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:]
            if rest.strip() == "":
                break
            off = pos + len(rest) - len(rest.lstrip())
            raise ParseError(f"unexpected character {text[off]!r}", off, text)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], self.text)

    def expect(self, value):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != value:
            self.fail(f"expected {value!r}, found {tok[1] or 'end of input'!r}")
        return self.take()

    def parse(self) -> Node:
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            _, op, off = self.take()
            node = BinOp(op, node, self.term(), off)
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            _, op, off = self.take()
            node = BinOp(op, node, self.unary(), off)
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return Neg(self.unary(), tok[2])
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            return BinOp("^", base, self.unary(), tok[2])
        return base

    def atom(self):
        kind, val, off = self.peek()
        if kind == "num":
            self.take()
            return Num(float(val), off)
        if kind == "name":
            self.take()
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                if val not in FUNCTIONS:
                    self.fail(f"unknown function {val!r}", (kind, val, off))
                self.take()
                args = [self.expr()]
                while self.peek()[0] == "op" and self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != FUNCTIONS[val]:
                    self.fail(f"{val} takes {FUNCTIONS[val]} argument(s), got {len(args)}", (kind, val, off))
                return Call(val, tuple(args), off)
            if val in FUNCTIONS:
                self.fail(f"function {val!r} needs an argument list", (kind, val, off))
            if val not in VARIABLES:
                self.fail(f"unknown identifier {val!r}", (kind, val, off))
            return Var(val, off)
        if kind == "op" and val == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        self.fail(f"expected a number, name or '(', found {val or 'end of input'!r}")


def parse(text: str) -> Node:
    """Parse ``text`` into an immutable AST; :class:`ParseError` carries the offset."""
    if not isinstance(text, str):
        raise ParseError(f"expression must be a string, got {type(text).__name__}", 0)
    return _Parser(text).parse()


def _check(result, what: str, node, *inputs):
    res = np.asarray(result)
    if np.all(np.isfinite(res)):
        return result
    ok_in = np.ones(res.shape, dtype=bool)
    for a in inputs:
        ok_in &= np.broadcast_to(np.isfinite(np.asarray(a)), res.shape)
    if np.any(~np.isfinite(res) & ok_in):
        raise EvaluationError(f"{what} left its domain (at offset {node.offset})")
    return result


def _call(node: Call, args):
    name = node.name
    a = args[0]
    if name == "ln":
        if np.any(np.asarray(a) <= 0):
            raise EvaluationError(f"ln of a non-positive value (at offset {node.offset})")
        return np.log(a)
    if name == "sqrt":
        if np.any(np.asarray(a) < 0):
            raise EvaluationError(f"sqrt of a negative value (at offset {node.offset})")
        return np.sqrt(a)
    if name == "gamma":
        try:
            return gamma_fn(a)
        except DomainError as exc:
            raise EvaluationError(f"gamma: {exc} (at offset {node.offset})") from exc
    if name == "uppergamma":
        try:
            return upper_incomplete_gamma(a, args[1])
        except DomainError as exc:
            raise EvaluationError(f"uppergamma: {exc} (at offset {node.offset})") from exc
    return {"exp": np.exp, "sin": np.sin, "cos": np.cos, "abs": np.abs}[name](a)


def _eval(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, BinOp):
        left = _eval(node.left, env)
        right = _eval(node.right, env)
        if node.op == "+":
            out = np.add(left, right)
        elif node.op == "-":
            out = np.subtract(left, right)
        elif node.op == "*":
            out = np.multiply(left, right)
        elif node.op == "/":
            if np.any(np.asarray(right) == 0):
                raise EvaluationError(f"division by zero (at offset {node.offset})")
            out = np.divide(left, right)
        else:
            out = np.power(np.asarray(left, dtype=float), right)
        return _check(out, f"operator {node.op!r}", node, left, right)
    args = [_eval(a, env) for a in node.args]
    return _check(_call(node, args), f"{node.name}()", node, *args)


def evaluate(ast: Node, t=0.0, x=0.0, alpha=0.0):
    """Evaluate with numpy broadcasting over ``t`` and ``x``."""
    env = {"t": t, "x": x, "alpha": alpha}
    with np.errstate(all="ignore"):
        out = _eval(ast, env)
    if np.ndim(out) == 0:
        return float(out)
    return np.asarray(out, dtype=float)


def to_text(node: Node) -> str:
    """Fully parenthesized source text that parses back to an equal AST."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_text(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    return f"{node.name}({', '.join(to_text(a) for a in node.args)})"


@dataclass(frozen=True)
class Expression:
    """Parsed expression bound to a fixed ``alpha``; call as ``f(t, x)``."""

    text: str
    alpha: float = 0.0
    ast: Node = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ast", parse(self.text))

    def __call__(self, t=0.0, x=0.0):
        return evaluate(self.ast, t, x, self.alpha)

    def of_x(self, x):
        return self(0.0, x)

    def of_t(self, t):
        return self(t, 0.0)
