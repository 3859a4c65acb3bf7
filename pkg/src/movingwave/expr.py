"""Arithmetic expressions over ``t, x1..xn`` with analytic derivatives.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := base ("^" factor)?
    base   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")" | "-" base

Note that unary minus binds tighter than ``^``: ``-x^2`` is ``(-x)^2``.
Write ``-(x^2)`` for the other reading.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import ParseError

FUNCTIONS = ("sin", "cos", "exp", "sqrt", "tanh", "abs", "log")
CONSTANTS = {"pi": math.pi}

_NUMPY_FUNCS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "tanh": np.tanh,
    "abs": np.abs,
    "log": np.log,
}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


class Node:
    """Base class of expression tree nodes."""

    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __truediv__(self, other):
        return div(self, _lift(other))

    def __neg__(self):
        return neg(self)

    def __str__(self):
        return to_string(self)

    def diff(self, var):
        return derivative(self, var)

    def variables(self):
        out = set()
        _collect_vars(self, out)
        return out

    def is_constant(self):
        return not self.variables()

    def __call__(self, **env):
        return evaluate(self, env)


@dataclass(frozen=True, eq=True)
class Num(Node):
    value: float

    __str__ = Node.__str__


@dataclass(frozen=True, eq=True)
class Var(Node):
    name: str

    __str__ = Node.__str__


@dataclass(frozen=True, eq=True)
class Neg(Node):
    arg: Node

    __str__ = Node.__str__


@dataclass(frozen=True, eq=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node

    __str__ = Node.__str__


@dataclass(frozen=True, eq=True)
class Call(Node):
    func: str
    arg: Node

    __str__ = Node.__str__


ZERO = Num(0.0)
ONE = Num(1.0)


def _lift(v):
    return v if isinstance(v, Node) else Num(float(v))


def _collect_vars(node, out):
    if isinstance(node, Var):
        out.add(node.name)
    elif isinstance(node, Neg):
        _collect_vars(node.arg, out)
    elif isinstance(node, BinOp):
        _collect_vars(node.left, out)
        _collect_vars(node.right, out)
    elif isinstance(node, Call):
        _collect_vars(node.arg, out)


# ---------------------------------------------------------------- parsing


class _Parser:
    def __init__(self, text, allowed):
        self.text = text
        self.allowed = allowed
        self.tokens = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text):
        tokens = []
        i = 0
        n = len(text)
        while i < n:
            if text[i].isspace():
                i += 1
                continue
            m = _TOKEN_RE.match(text, i)
            if m is None or m.end() == i:
                raise ParseError(f"unexpected character {text[i]!r}", column=i + 1)
            kind = m.lastgroup
            start = m.start(kind)
            tokens.append((kind, m.group(kind), start + 1))
            i = m.end()
        tokens.append(("end", "", n + 1))
        return tokens

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value):
        kind, val, col = self.advance()
        if val != value:
            got = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"expected {value!r}, got {got}", column=col)

    def parse(self):
        node = self.expr()
        kind, val, col = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {val!r}", column=col)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        node = self.base()
        if self.peek()[1] == "^":
            self.advance()
            node = BinOp("^", node, self.factor())
        return node

    def base(self):
        kind, val, col = self.advance()
        if kind == "num":
            return Num(float(val))
        if kind == "ident":
            if self.peek()[1] == "(":
                if val not in FUNCTIONS:
                    raise ParseError(f"unknown function {val!r}", column=col)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            if val in CONSTANTS:
                return Var(val)
            if self.allowed is not None and val not in self.allowed:
                raise ParseError(f"unknown identifier {val!r}", column=col)
            return Var(val)
        if val == "(":
            node = self.expr()
            self.expect(")")
            return node
        if val == "-":
            return Neg(self.base())
        got = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {got}", column=col)


def allowed_variables(n, aliases=True):
    names = {"t"} | {f"x{i + 1}" for i in range(n)}
    if aliases and n == 1:
        names.add("x")
    return names


def parse(text, variables=None):
    """Parse ``text``; ``variables`` restricts the identifiers accepted."""
    if not isinstance(text, str):
        if isinstance(text, (int, float)):
            return Num(float(text))
        raise ParseError(f"expression must be a string, got {type(text).__name__}")
    allowed = None if variables is None else set(variables)
    return _Parser(text, allowed).parse()


# ---------------------------------------------------------------- printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}


def _fmt_num(v):
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    return 5  # atoms, calls, negations print as a base


def to_string(node):
    if isinstance(node, Num):
        s = _fmt_num(node.value)
        # negative literals come only from folding; keep them parseable
        return f"(-{s[1:]})" if s.startswith("-") else s
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg)})"
    if isinstance(node, Neg):
        inner = to_string(node.arg)
        if _prec(node.arg) < 5:
            inner = f"({inner})"
        return "-" + inner
    p = _PREC[node.op]
    left = to_string(node.left)
    right = to_string(node.right)
    if node.op == "^":
        # right associative, base must be a base-level item
        if _prec(node.left) <= p:
            left = f"({left})"
        if _prec(node.right) < p:
            right = f"({right})"
        return f"{left}^{right}"
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    sep = " " if p == 1 else ""
    return f"{left}{sep}{node.op}{sep}{right}"


# ------------------------------------------------------- simplifying builders


def _num(node):
    return node.value if isinstance(node, Num) else None


def add(a, b):
    va, vb = _num(a), _num(b)
    if va is not None and vb is not None:
        return Num(va + vb)
    if va == 0.0:
        return b
    if vb == 0.0:
        return a
    if isinstance(b, Neg):
        return sub(a, b.arg)
    return BinOp("+", a, b)


def sub(a, b):
    va, vb = _num(a), _num(b)
    if va is not None and vb is not None:
        return Num(va - vb)
    if vb == 0.0:
        return a
    if va == 0.0:
        return neg(b)
    if a == b:
        return ZERO
    return BinOp("-", a, b)


def neg(a):
    va = _num(a)
    if va is not None:
        return Num(-va)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mul(a, b):
    va, vb = _num(a), _num(b)
    if va is not None and vb is not None:
        return Num(va * vb)
    if va == 0.0 or vb == 0.0:
        return ZERO
    if va == 1.0:
        return b
    if vb == 1.0:
        return a
    if va == -1.0:
        return neg(b)
    if vb == -1.0:
        return neg(a)
    if isinstance(a, Neg):
        return neg(mul(a.arg, b))
    if isinstance(b, Neg):
        return neg(mul(a, b.arg))
    return BinOp("*", a, b)


def div(a, b):
    va, vb = _num(a), _num(b)
    if va is not None and vb is not None and vb != 0.0:
        return Num(va / vb)
    if va == 0.0:
        return ZERO
    if vb == 1.0:
        return a
    if isinstance(a, Neg):
        return neg(div(a.arg, b))
    return BinOp("/", a, b)


def power(a, b):
    va, vb = _num(a), _num(b)
    if va is not None and vb is not None:
        try:
            return Num(va**vb)
        except (OverflowError, ZeroDivisionError):
            pass
    if vb == 0.0:
        return ONE
    if vb == 1.0:
        return a
    return BinOp("^", a, b)


def call(func, arg):
    v = _num(arg)
    if v is not None:
        try:
            return Num(float(_NUMPY_FUNCS[func](v)))
        except (ValueError, FloatingPointError):
            pass
    return Call(func, arg)


# -------------------------------------------------------------- derivative


def derivative(node, var):
    """Analytic derivative of ``node`` with respect to variable ``var``."""
    if isinstance(node, Num):
        return ZERO
    if isinstance(node, Var):
        return ONE if node.name == var else ZERO
    if isinstance(node, Neg):
        return neg(derivative(node.arg, var))
    if isinstance(node, Call):
        u = node.arg
        du = derivative(u, var)
        if _num(du) == 0.0:
            return ZERO
        f = node.func
        if f == "sin":
            outer = call("cos", u)
        elif f == "cos":
            outer = neg(call("sin", u))
        elif f == "exp":
            outer = node
        elif f == "sqrt":
            outer = div(Num(0.5), node)
        elif f == "tanh":
            outer = sub(ONE, power(node, Num(2.0)))
        elif f == "abs":
            outer = div(u, node)
        elif f == "log":
            outer = div(ONE, u)
        else:  # pragma: no cover - parser rejects others
            raise ParseError(f"no derivative rule for {f}")
        return mul(outer, du)
    a, b = node.left, node.right
    da, db = derivative(a, var), derivative(b, var)
    op = node.op
    if op == "+":
        return add(da, db)
    if op == "-":
        return sub(da, db)
    if op == "*":
        return add(mul(da, b), mul(a, db))
    if op == "/":
        if _num(db) == 0.0:
            return div(da, b)
        return div(sub(mul(da, b), mul(a, db)), power(b, Num(2.0)))
    # power
    if b.is_constant():
        if _num(da) == 0.0:
            return ZERO
        return mul(mul(b, power(a, sub(b, ONE))), da)
    # a^b = exp(b log a)
    inner = add(mul(db, call("log", a)), div(mul(b, da), a))
    return mul(node, inner)


# -------------------------------------------------------------- evaluation


def evaluate(node, env):
    """Evaluate with numpy broadcasting over the arrays in ``env``."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        if node.name in env:
            return env[node.name]
        if node.name in CONSTANTS:
            return CONSTANTS[node.name]
        raise KeyError(f"no value for variable {node.name!r}")
    if isinstance(node, Neg):
        return -evaluate(node.arg, env)
    if isinstance(node, Call):
        return _NUMPY_FUNCS[node.func](evaluate(node.arg, env))
    a = evaluate(node.left, env)
    b = evaluate(node.right, env)
    op = node.op
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        return a / b
    return np.power(a, b) if isinstance(a, np.ndarray) or isinstance(b, np.ndarray) else a**b


def evaluate_like(node, env, like):
    """Evaluate and broadcast the result to the shape of ``like``."""
    val = evaluate(node, env)
    return np.broadcast_to(np.asarray(val, dtype=float), np.shape(like)).copy()
