"""Small expression language for weights, inequalities and lower candidates.

Grammar (standard precedence, left associative)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := ("-" | "+") unary | atom
    atom   := NUMBER | "pi" | "e" | COORD | NAME "(" expr ("," expr)* ")" | "(" expr ")"
    COORD  := "z1" | "z2" | ...

Functions: abs, re, im, log, exp, sqrt, min, max (min/max take two or more
arguments).  Coordinates are complex; everything else is evaluated with numpy
over a batch of points.

Sentinel table (no exceptions are raised during evaluation):

    ============================  =========
    situation                     result
    ============================  =========
    log(0)                        -inf
    log(x), x < 0 or non-real     nan
    sqrt(x), x < 0 or non-real    nan
    x / 0                         nan
    min/max of non-real values    nan
    non-real final value          nan
    exp overflow                  +inf
    ============================  =========

Callers treat ``nan`` as an evaluation error and ``-inf`` as a legitimate
value (a weight may be -inf).
"""

from __future__ import annotations

import re as _re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ExprSyntaxError

FUNCTIONS = {"abs": 1, "re": 1, "im": 1, "log": 1, "exp": 1, "sqrt": 1, "min": -2, "max": -2}
CONSTANTS = {"pi": float(np.pi), "e": float(np.e)}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 1-based coordinate index


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Node = Union[Num, Var, Unary, Binary, Call]

_TOKEN = _re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/(),]))"
)


def _tokenize(text):
    pos = 0
    tokens = []
    while True:
        m = _TOKEN.match(text, pos)
        if m is None:
            rest = text[pos:]
            if rest.strip() == "":
                break
            offset = pos + (len(rest) - len(rest.lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[offset]!r}", offset)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, off = self.peek()
        if val != value or kind == "end":
            what = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {what}", off)
        return self.take()

    def parse(self):
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {val!r}", off)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        kind, val, _ = self.peek()
        if kind == "op" and val in ("-", "+"):
            self.take()
            return Unary(val, self.unary())
        return self.atom()

    def atom(self):
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "name":
            if val in FUNCTIONS:
                self.expect("(")
                args = [self.expr()]
                while self.peek()[1] == "," and self.peek()[0] == "op":
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                arity = FUNCTIONS[val]
                if arity > 0 and len(args) != arity:
                    raise ExprSyntaxError(f"{val} takes {arity} argument(s)", off)
                if arity < 0 and len(args) < -arity:
                    raise ExprSyntaxError(f"{val} takes at least {-arity} arguments", off)
                return Call(val, tuple(args))
            if val in CONSTANTS:
                return Num(CONSTANTS[val])
            m = _re.fullmatch(r"z([1-9]\d*)", val)
            if m:
                return Var(int(m.group(1)))
            raise ExprSyntaxError(f"unknown identifier {val!r}", off)
        what = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {what}", off)


def parse_expr(text: str) -> Node:
    """Parse ``text`` into an expression tree; errors carry the character offset."""
    return _Parser(text).parse()


def to_text(node: Node) -> str:
    """Fully parenthesised rendering; ``parse_expr(to_text(t)) == t``."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return f"z{node.index}"
    if isinstance(node, Unary):
        return f"({node.op}{to_text(node.operand)})"
    if isinstance(node, Binary):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    return f"{node.name}({', '.join(to_text(a) for a in node.args)})"


def max_coordinate(node: Node) -> int:
    """Largest coordinate index referenced (0 when none)."""
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Unary):
        return max_coordinate(node.operand)
    if isinstance(node, Binary):
        return max(max_coordinate(node.left), max_coordinate(node.right))
    if isinstance(node, Call):
        return max((max_coordinate(a) for a in node.args), default=0)
    return 0


def modulus_only(node: Node) -> bool:
    """True when coordinates only enter through ``abs(z_i)``.

    Such expressions are invariant under independent rotations of the
    coordinates, which is what the Reinhardt fast paths rely on.
    """
    if isinstance(node, Var):
        return False
    if isinstance(node, Call):
        if node.name == "abs" and isinstance(node.args[0], Var):
            return True
        return all(modulus_only(a) for a in node.args)
    if isinstance(node, Unary):
        return modulus_only(node.operand)
    if isinstance(node, Binary):
        return modulus_only(node.left) and modulus_only(node.right)
    return True


def _real(x):
    x = np.asarray(x)
    if np.iscomplexobj(x):
        return np.where(x.imag == 0, x.real, np.nan)
    return x.astype(float)


def _eval(node, Z):
    if isinstance(node, Num):
        return np.full(Z.shape[0], node.value)
    if isinstance(node, Var):
        return Z[:, node.index - 1]
    if isinstance(node, Unary):
        v = _eval(node.operand, Z)
        return -v if node.op == "-" else v
    if isinstance(node, Binary):
        a, b = _eval(node.left, Z), _eval(node.right, Z)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        zero = b == 0
        out = a / np.where(zero, 1.0, b)
        return np.where(zero, np.nan, out)
    args = [_eval(a, Z) for a in node.args]
    name = node.name
    if name == "abs":
        return np.abs(args[0])
    if name == "re":
        return np.real(args[0]).astype(float)
    if name == "im":
        return np.imag(args[0]).astype(float)
    if name == "exp":
        return np.exp(args[0])
    if name == "log":
        x = _real(args[0])
        return np.where(x > 0, np.log(np.where(x > 0, x, 1.0)), np.where(x == 0, -np.inf, np.nan))
    if name == "sqrt":
        x = _real(args[0])
        return np.where(x >= 0, np.sqrt(np.where(x >= 0, x, 0.0)), np.nan)
    vals = np.stack([_real(a) for a in args])
    return vals.min(axis=0) if name == "min" else vals.max(axis=0)


def evaluate(node: Node, points) -> np.ndarray:
    """Evaluate on a batch of points of shape (M, n); returns a real array (M,)."""
    Z = np.atleast_2d(np.asarray(points, dtype=complex))
    need = max_coordinate(node)
    if need > Z.shape[1]:
        raise ValueError(f"expression uses z{need} but points have dimension {Z.shape[1]}")
    with np.errstate(all="ignore"):
        out = _real(_eval(node, Z))
    return np.broadcast_to(out, (Z.shape[0],)).astype(float)


class Expression:
    """Parsed expression usable as a batch oracle ``f(points) -> values``."""

    def __init__(self, text: str):
        self.text = text
        self.tree = parse_expr(text)
        self.modulus_only = modulus_only(self.tree)
        self.dimension = max_coordinate(self.tree)

    def __call__(self, points):
        return evaluate(self.tree, points)

    def __repr__(self):
        return f"Expression({self.text!r})"
