"""Closed-form real functions of (kx, ky): parsing, evaluation, derivatives.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := number | 'pi' | 'kx' | 'ky' | 'sin(' expr ')' | 'cos(' expr ')'
            | '(' expr ')' | '-' factor

Expressions are immutable trees. Evaluation is vectorised over numpy arrays.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ExprSyntaxError, UnknownIdentifier

VARIABLES = ("kx", "ky")
FUNCTIONS = ("sin", "cos")

_PRECEDENCE = {"+": 1, "-": 1, "*": 2, "/": 2}


class Expr:
    """Base node. Subclasses are frozen dataclasses."""

    def __call__(self, kx, ky):
        kx = np.asarray(kx, dtype=float)
        ky = np.asarray(ky, dtype=float)
        value = self._eval(kx, ky)
        shape = np.broadcast_shapes(kx.shape, ky.shape)
        if np.shape(value) != shape:
            value = np.broadcast_to(value, shape).copy()
        return value if shape else float(value)

    def _eval(self, kx, ky):
        raise NotImplementedError

    def _prec(self):
        return 3

    def is_constant(self):
        return not self.variables()

    def variables(self):
        return frozenset()

    def __str__(self):
        return self._fmt()


@dataclass(frozen=True)
class Num(Expr):
    value: float

    def _eval(self, kx, ky):
        return self.value

    def _fmt(self):
        v = self.value
        if v < 0 or (v == 0 and math.copysign(1.0, v) < 0):
            return "-" + Num(-v)._fmt()
        if v.is_integer() and v < 1e15:
            return str(int(v))
        return repr(v)


@dataclass(frozen=True)
class Pi(Expr):
    def _eval(self, kx, ky):
        return math.pi

    def _fmt(self):
        return "pi"


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def _eval(self, kx, ky):
        return kx if self.name == "kx" else ky

    def variables(self):
        return frozenset([self.name])

    def _fmt(self):
        return self.name


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    def _eval(self, kx, ky):
        return -self.arg._eval(kx, ky)

    def variables(self):
        return self.arg.variables()

    def _fmt(self):
        inner = self.arg._fmt()
        if isinstance(self.arg, BinOp):
            inner = f"({inner})"
        return "-" + inner


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def _eval(self, kx, ky):
        lhs = self.left._eval(kx, ky)
        rhs = self.right._eval(kx, ky)
        if self.op == "+":
            return lhs + rhs
        if self.op == "-":
            return lhs - rhs
        if self.op == "*":
            return lhs * rhs
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.divide(lhs, rhs)

    def _prec(self):
        return _PRECEDENCE[self.op]

    def variables(self):
        return self.left.variables() | self.right.variables()

    def _fmt(self):
        # Parenthesise so that re-parsing rebuilds exactly this tree.
        p = self._prec()
        lhs = self.left._fmt()
        rhs = self.right._fmt()
        if self.left._prec() < p:
            lhs = f"({lhs})"
        if self.right._prec() <= p:
            rhs = f"({rhs})"
        return f"{lhs} {self.op} {rhs}"


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr

    def _eval(self, kx, ky):
        x = self.arg._eval(kx, ky)
        return np.sin(x) if self.func == "sin" else np.cos(x)

    def variables(self):
        return self.arg.variables()

    def _fmt(self):
        return f"{self.func}({self.arg._fmt()})"


# -- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/()]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            stripped = len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[pos + stripped]!r}", pos + stripped)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.advance()
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos)

    def parse(self):
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {text!r}", pos)
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
        kind, text, pos = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text == "pi":
                return Pi()
            if text in VARIABLES:
                return Var(text)
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise UnknownIdentifier(text, pos)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        if text == "-":
            return Neg(self.factor())
        found = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {found}", pos)


def parse_expr(text: str) -> Expr:
    """Parse ``text`` into an expression tree.

    Raises ExprSyntaxError (with a character position) or UnknownIdentifier.
    """
    return _Parser(text).parse()


# -- constant-folding constructors -------------------------------------------

def _num(node):
    if isinstance(node, Num):
        return node.value
    return None


def neg(u):
    v = _num(u)
    if v is not None:
        return Num(-v)
    if isinstance(u, Neg):
        return u.arg
    return Neg(u)


def add(u, v):
    x, y = _num(u), _num(v)
    if x is not None and y is not None:
        return Num(x + y)
    if x == 0:
        return v
    if y == 0:
        return u
    return BinOp("+", u, v)


def sub(u, v):
    x, y = _num(u), _num(v)
    if x is not None and y is not None:
        return Num(x - y)
    if y == 0:
        return u
    if x == 0:
        return neg(v)
    return BinOp("-", u, v)


def mul(u, v):
    x, y = _num(u), _num(v)
    if x is not None and y is not None:
        return Num(x * y)
    if x == 0 or y == 0:
        return Num(0.0)
    if x == 1:
        return v
    if y == 1:
        return u
    if x == -1:
        return neg(v)
    if y == -1:
        return neg(u)
    return BinOp("*", u, v)


def div(u, v):
    x, y = _num(u), _num(v)
    if x is not None and y is not None and y != 0:
        return Num(x / y)
    if x == 0:
        return Num(0.0)
    if y == 1:
        return u
    return BinOp("/", u, v)


def differentiate(e: Expr, var: str) -> Expr:
    """Exact symbolic derivative of ``e`` with respect to ``var``."""
    if var not in VARIABLES:
        raise ValueError(f"can only differentiate with respect to {VARIABLES}, not {var!r}")
    if isinstance(e, (Num, Pi)):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0 if e.name == var else 0.0)
    if isinstance(e, Neg):
        return neg(differentiate(e.arg, var))
    if isinstance(e, Call):
        du = differentiate(e.arg, var)
        if e.func == "sin":
            return mul(Call("cos", e.arg), du)
        return mul(neg(Call("sin", e.arg)), du)
    if isinstance(e, BinOp):
        du = differentiate(e.left, var)
        dv = differentiate(e.right, var)
        if e.op == "+":
            return add(du, dv)
        if e.op == "-":
            return sub(du, dv)
        if e.op == "*":
            return add(mul(du, e.right), mul(e.left, dv))
        return div(sub(mul(du, e.right), mul(e.left, dv)), mul(e.right, e.right))
    raise TypeError(f"not an expression node: {e!r}")


@dataclass(frozen=True)
class SurfacePair:
    """The two real functions ``a`` and ``b`` defining a model, with partials."""

    a: Expr
    b: Expr
    da_dkx: Expr
    da_dky: Expr
    db_dkx: Expr
    db_dky: Expr
    det_j: Expr

    @classmethod
    def from_exprs(cls, a: Expr, b: Expr) -> "SurfacePair":
        da_dkx = differentiate(a, "kx")
        da_dky = differentiate(a, "ky")
        db_dkx = differentiate(b, "kx")
        db_dky = differentiate(b, "ky")
        det_j = BinOp("-", BinOp("*", da_dkx, db_dky), BinOp("*", da_dky, db_dkx))
        return cls(a, b, da_dkx, da_dky, db_dkx, db_dky, det_j)

    @classmethod
    def parse(cls, a: str, b: str) -> "SurfacePair":
        return cls.from_exprs(parse_expr(a), parse_expr(b))

    def values(self, kx, ky):
        return self.a(kx, ky), self.b(kx, ky)

    def grad_a(self, kx, ky):
        return self.da_dkx(kx, ky), self.da_dky(kx, ky)

    def grad_b(self, kx, ky):
        return self.db_dkx(kx, ky), self.db_dky(kx, ky)

    def jacobian(self, kx, ky):
        """Array of shape (..., 2, 2): rows (a, b), columns (kx, ky)."""
        ax, ay = self.grad_a(kx, ky)
        bx, by = self.grad_b(kx, ky)
        return np.stack([np.stack([ax, ay], -1), np.stack([bx, by], -1)], -2)

    def __str__(self):
        return f"a = {self.a}, b = {self.b}"


def load_model_file(path) -> tuple[str, SurfacePair, dict]:
    """Read a model config (JSON with ``name``, ``a``, ``b``).

    Returns ``(name, pair, extra)`` where ``extra`` holds any other keys.
    """
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read model file {path}: {exc}") from exc
    if not isinstance(data, dict) or "a" not in data or "b" not in data:
        raise ConfigError(f"model file {path} needs string fields 'a' and 'b'")
    name = str(data.get("name", Path(path).stem))
    pair = SurfacePair.parse(str(data["a"]), str(data["b"]))
    extra = {k: v for k, v in data.items() if k not in ("name", "a", "b")}
    return name, pair, extra
