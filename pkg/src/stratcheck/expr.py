"""Expression language for definable functions and their first-order jets.

Grammar (``^`` binds tightest and is right-associative)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

``FUNC`` is one of exp, ln, sqrt, abs, sin.  Every other name is a variable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .numscale import DomainError, XScalar, from_float, xexp, xln, xsin, xsqrt

__all__ = [
    "Node",
    "Expr",
    "Jet",
    "ExprSyntaxError",
    "EvalDomainError",
    "FUNCTIONS",
    "parse",
    "eval_jet",
    "STANDARD",
    "EXTENDED",
]

FUNCTIONS = ("exp", "ln", "sqrt", "abs", "sin")
STANDARD = "standard"
EXTENDED = "extended"


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class EvalDomainError(DomainError):
    def __init__(self, message: str, node: "Node"):
        super().__init__(message if node is None else f"{message} in {node}")
        self.node = node


@dataclass(frozen=True)
class Node:
    """AST node.  ``op`` is 'const', 'var', a binary operator, 'neg' or a function."""

    op: str
    args: tuple = ()
    value: float | None = None
    name: str | None = None

    def __str__(self):
        if self.op == "const":
            v = self.value
            if v.is_integer() and abs(v) < 1e15:
                s = str(int(v))
            else:
                s = repr(v)
            return f"({s})" if v < 0 else s
        if self.op == "var":
            return self.name
        if self.op == "neg":
            return f"(-{self.args[0]})"
        if self.op in FUNCTIONS:
            return f"{self.op}({self.args[0]})"
        a, b = self.args
        return f"({a} {self.op} {b})"


_TOKEN = re.compile(
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()])"
)


def _tokenize(text: str):
    toks = []
    pos, n = 0, len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        toks.append((m.lastgroup, m.group(), _byte_offset(text, pos)))
        pos = m.end()
    toks.append(("end", "", _byte_offset(text, n)))
    return toks


def _byte_offset(text: str, idx: int) -> int:
    return len(text[:idx].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value):
        kind, v, off = self.take()
        if v != value or kind == "end":
            raise ExprSyntaxError(f"expected {value!r}", off)

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Node(op, (node, self.term()))
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Node(op, (node, self.unary()))
        return node

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Node("neg", (self.unary(),))
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return Node("^", (base, self.unary()))
        return base

    def atom(self):
        kind, v, off = self.take()
        if kind == "num":
            return Node("const", value=float(v))
        if kind == "name":
            if v in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Node(v, (arg,))
            return Node("var", name=v)
        if kind == "op" and v == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ExprSyntaxError("unexpected end of input", off)
        raise ExprSyntaxError(f"unexpected {v!r}", off)


def _collect_vars(node: Node, out: set):
    if node.op == "var":
        out.add(node.name)
    for a in node.args:
        _collect_vars(a, out)


@dataclass(frozen=True)
class Expr:
    ast: Node
    free_vars: tuple
    text: str = ""

    def __str__(self):
        return str(self.ast)

    def __call__(self, scalar_system=STANDARD, **point):
        return eval_jet(self, point, scalar_system).value


def parse(text: str) -> Expr:
    if not text or not text.strip():
        raise ExprSyntaxError("empty input", 0)
    p = _Parser(text)
    node = p.expr()
    kind, v, off = p.peek()
    if kind != "end":
        raise ExprSyntaxError(f"unexpected {v!r}", off)
    names = set()
    _collect_vars(node, names)
    return Expr(node, tuple(sorted(names)), text)


@dataclass
class Jet:
    value: object
    gradient: list


class _Std:
    zero = 0.0
    one = 1.0

    @staticmethod
    def const(v):
        return float(v)

    @staticmethod
    def positive(v):
        return v > 0

    @staticmethod
    def is_zero(v):
        return v == 0

    @staticmethod
    def exp(v):
        try:
            return math.exp(v)
        except OverflowError:
            return math.inf

    ln = staticmethod(math.log)
    sqrt = staticmethod(math.sqrt)
    sin = staticmethod(math.sin)
    cos = staticmethod(math.cos)

    @staticmethod
    def sign(v):
        return (v > 0) - (v < 0)

    @staticmethod
    def finite(v):
        return math.isfinite(v)


class _Ext:
    zero = XScalar(0)
    one = XScalar(1, 0.0)

    @staticmethod
    def const(v):
        return XScalar.coerce(v)

    @staticmethod
    def positive(v):
        return v.sign > 0

    @staticmethod
    def is_zero(v):
        return v.sign == 0

    exp = staticmethod(xexp)
    ln = staticmethod(xln)
    sqrt = staticmethod(xsqrt)
    sin = staticmethod(xsin)

    @staticmethod
    def cos(v):
        if v.sign == 0 or v.logmag < -40.0:
            return XScalar(1, 0.0)
        return from_float(math.cos(float(v)))

    @staticmethod
    def sign(v):
        return v.sign

    @staticmethod
    def finite(v):
        return True


def _is_int_const(node: Node):
    return node.op == "const" and node.value.is_integer()


def _jet(node: Node, env, ar, nv):
    op = node.op
    if op == "const":
        return ar.const(node.value), [ar.zero] * nv
    if op == "var":
        return env[node.name]
    if op == "neg":
        v, g = _jet(node.args[0], env, ar, nv)
        return -v, [-d for d in g]
    if op in FUNCTIONS:
        a, ga = _jet(node.args[0], env, ar, nv)
        if op == "exp":
            v = ar.exp(a)
            if not ar.finite(v):
                raise EvalDomainError("exp overflow", node)
            return v, [v * d for d in ga]
        if op == "ln":
            if not ar.positive(a):
                raise EvalDomainError("ln of nonpositive argument", node)
            return ar.ln(a), [d / a for d in ga]
        if op == "sqrt":
            if not ar.positive(a):
                raise EvalDomainError("sqrt of nonpositive argument", node)
            v = ar.sqrt(a)
            two_v = v + v
            return v, [d / two_v for d in ga]
        if op == "abs":
            s = ar.sign(a)
            return abs(a), [d * s if s else ar.zero for d in ga]
        if op == "sin":
            c = ar.cos(a)
            return ar.sin(a), [c * d for d in ga]
    a, ga = _jet(node.args[0], env, ar, nv)
    b_node = node.args[1]
    if op == "^" and _is_int_const(b_node):
        n = int(b_node.value)
        if n == 0:
            return ar.one, [ar.zero] * nv
        if ar.is_zero(a) and n < 0:
            raise EvalDomainError("division by zero", node)
        v = a**n
        dv = ar.const(n) * a ** (n - 1) if n != 1 else ar.one
        return v, [dv * d for d in ga]
    b, gb = _jet(b_node, env, ar, nv)
    if op == "+":
        return a + b, [x + y for x, y in zip(ga, gb)]
    if op == "-":
        return a - b, [x - y for x, y in zip(ga, gb)]
    if op == "*":
        return a * b, [x * b + a * y for x, y in zip(ga, gb)]
    if op == "/":
        if ar.is_zero(b):
            raise EvalDomainError("division by zero", node)
        v = a / b
        return v, [(x - v * y) / b for x, y in zip(ga, gb)]
    if op == "^":
        # a^b := exp(b ln a), a > 0
        if not ar.positive(a):
            raise EvalDomainError("non-integer power of nonpositive base", node)
        la = ar.ln(a)
        v = ar.exp(b * la)
        if not ar.finite(v):
            raise EvalDomainError("power overflow", node)
        return v, [v * (y * la + b * x / a) for x, y in zip(ga, gb)]
    raise ValueError(f"unknown node {op!r}")


def eval_jet(e: Expr, point: dict, scalar_system: str = STANDARD) -> Jet:
    """Value and gradient (ordered by ``e.free_vars``) by forward-mode AD."""
    if scalar_system == STANDARD:
        ar = _Std
    elif scalar_system == EXTENDED:
        ar = _Ext
    else:
        raise ValueError(f"unknown scalar system {scalar_system!r}")
    nv = len(e.free_vars)
    env = {}
    for i, name in enumerate(e.free_vars):
        if name not in point:
            raise KeyError(f"point does not bind variable {name!r}")
        seed = [ar.zero] * nv
        seed[i] = ar.one
        env[name] = (ar.const(point[name]), seed)
    v, g = _jet(e.ast, env, ar, nv)
    if not ar.finite(v) or not all(ar.finite(d) for d in g):
        raise EvalDomainError("non-finite result", e.ast)
    return Jet(v, g)
