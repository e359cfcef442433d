"""Expression language for surface parametrizations.

Grammar (``^`` binds tighter than unary minus, and is right associative)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | 'pi' | 'u' | 'v' | FUNC '(' expr ')' | 'intu' '(' expr ')' | '(' expr ')'

Exponents must fold to rational constants.  ``intu(g)`` is the integral of
``g`` from 0 to ``u`` and may not mention ``v``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.integrate import quad

from . import jet as J
from .jet import Jet2

FUNCTIONS = tuple(J.ELEMENTARY)


class ExprError(ValueError):
    """Parse or evaluation error; carries an optional (line, column) position."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line, self.col = line, col
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(where + message)


class EvaluationError(ValueError):
    pass


# --- AST ---------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: "Node"
    rational: Fraction = field(compare=False)


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"


@dataclass(frozen=True)
class IntU:
    body: "Node"


Node = Union[Num, Pi, Var, Neg, BinOp, Pow, Call, IntU]


# --- tokenizer / parser --------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str, line: int, col0: int):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            stripped = len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprError(f"unexpected character {text[pos + stripped]!r}", line, col0 + pos + stripped + 1)
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind), line, col0 + start + 1))
        pos = m.end()
    out.append(("end", "", line, col0 + len(text) + 1))
    return out


class _Parser:
    def __init__(self, text: str, line: int = 1, col0: int = 0):
        self.toks = _tokenize(text, line, col0)
        self.i = 0
        self.in_intu = False

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            raise ExprError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2], tok[3])
        return tok

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprError(f"unexpected token {tok[1]!r}", tok[2], tok[3])
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return Neg(self.unary())
        if tok[0] == "op" and tok[1] == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            tok = self.take()
            exponent = self.unary()
            r = fold_rational(exponent)
            if r is None:
                raise ExprError("exponent must be a rational constant", tok[2], tok[3])
            return Pow(base, exponent, r)
        return base

    def atom(self):
        tok = self.take()
        kind, text, line, col = tok
        if kind == "num":
            return Num(Fraction(text))
        if kind == "name":
            if text == "pi":
                return Pi()
            if text in ("u", "v"):
                if text == "v" and self.in_intu:
                    raise ExprError("'v' is not allowed inside intu", line, col)
                return Var(text)
            if text == "intu":
                self.expect("(")
                outer, self.in_intu = self.in_intu, True
                body = self.expr()
                self.in_intu = outer
                self.expect(")")
                return IntU(body)
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise ExprError(f"unknown identifier {text!r}", line, col)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        raise ExprError(f"unexpected token {text or 'end of input'!r}", line, col)


def fold_rational(node: Node) -> Fraction | None:
    """Exact rational value of a constant subtree, or None."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Neg):
        r = fold_rational(node.arg)
        return None if r is None else -r
    if isinstance(node, BinOp):
        a, b = fold_rational(node.left), fold_rational(node.right)
        if a is None or b is None:
            return None
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0:
            return None
        return a / b
    if isinstance(node, Pow):
        a = fold_rational(node.base)
        if a is None or node.rational.denominator != 1:
            return None
        if a == 0 and node.rational < 0:
            return None
        return a ** node.rational.numerator
    return None


def parse_expr(text: str, line: int = 1, col0: int = 0) -> Node:
    return _Parser(text, line, col0).parse()


# --- printing ----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_number(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    k = 0
    while 10**k % d:
        k += 1
        if k > 64:  # no terminating decimal
            return f"({x.numerator}/{d})"
    digits = x.numerator * (10 ** k // d)
    sign = "-" if digits < 0 else ""
    s = str(abs(digits)).rjust(k + 1, "0")
    return f"{sign}{s[:-k]}.{s[-k:]}"


def to_text(node: Node, parent: int = 0) -> str:
    """Print an AST so that parsing the result gives the same AST."""
    if isinstance(node, Num):
        return _fmt_number(node.value)
    if isinstance(node, Pi):
        return "pi"
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        s = "-" + to_text(node.arg, 3)
        return f"({s})" if parent > 1 else s
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        s = f"{to_text(node.left, p)} {node.op} {to_text(node.right, p + 1)}"
        return f"({s})" if parent > p else s
    if isinstance(node, Pow):
        s = f"{to_text(node.base, 5)}^{to_text(node.exponent, 5)}"
        return f"({s})" if parent > 3 else s
    if isinstance(node, Call):
        return f"{node.fn}({to_text(node.arg)})"
    if isinstance(node, IntU):
        return f"intu({to_text(node.body)})"
    raise TypeError(node)


# --- evaluation ---------------------------------------------------------------

def _scalar_eval(node: Node, u: float):
    """Float evaluation of a v-free subtree (used by intu quadrature)."""
    if isinstance(node, Num):
        return float(node.value)
    if isinstance(node, Pi):
        return math.pi
    if isinstance(node, Var):
        return u
    if isinstance(node, Neg):
        return -_scalar_eval(node.arg, u)
    if isinstance(node, BinOp):
        a, b = _scalar_eval(node.left, u), _scalar_eval(node.right, u)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0:
            raise EvaluationError("division by zero")
        return a / b
    if isinstance(node, Pow):
        return float(J.real_power(_scalar_eval(node.base, u), node.rational))
    if isinstance(node, Call):
        return float(J.ELEMENTARY[node.fn](_scalar_eval(node.arg, u)))
    if isinstance(node, IntU):
        return _intu_value(node.body, u)
    raise TypeError(node)


@lru_cache(maxsize=16384)
def _intu_value(body: Node, u: float) -> float:
    if u == 0.0:
        return 0.0
    val, _err = quad(lambda t: _scalar_eval(body, t), 0.0, u, epsabs=1e-12, epsrel=1e-13, limit=200)
    return float(val)


def eval_node(node: Node, u: Jet2, v: Jet2):
    """Evaluate an AST on variable jets; constant subtrees return floats."""
    if isinstance(node, Num):
        return float(node.value)
    if isinstance(node, Pi):
        return math.pi
    if isinstance(node, Var):
        return u if node.name == "u" else v
    if isinstance(node, Neg):
        return -eval_node(node.arg, u, v)
    if isinstance(node, BinOp):
        a, b = eval_node(node.left, u, v), eval_node(node.right, u, v)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if not isinstance(b, J._Jet) and b == 0:
            raise EvaluationError("division by zero")
        return a / b
    if isinstance(node, Pow):
        return J.power(eval_node(node.base, u, v), node.rational)
    if isinstance(node, Call):
        return J.ELEMENTARY[node.fn](eval_node(node.arg, u, v))
    if isinstance(node, IntU):
        return _eval_intu(node.body, u, v)
    raise TypeError(node)


def _eval_intu(body: Node, u: Jet2, v: Jet2) -> Jet2:
    d = u.degree
    u0 = np.asarray(u.value, dtype=float)
    values = np.vectorize(lambda x: _intu_value(body, float(x)), otypes=[float])(u0)
    out = Jet2.constant(values, d)
    if d >= 1:
        g = eval_node(body, u.truncate(d - 1), v.truncate(d - 1))
        if not isinstance(g, Jet2):
            g = Jet2.constant(np.broadcast_to(g, u0.shape), d - 1)
        for k in range(1, d + 1):
            out.c[J.mono_index(k, 0)] = g.coef(k - 1, 0) / k
    return out


# --- surfaces ---------------------------------------------------------------

@dataclass(frozen=True)
class SurfaceDef:
    name: str
    x: Node
    y: Node
    z: Node
    u_range: tuple[float, float]
    v_range: tuple[float, float]
    u_periodic: bool = False
    v_periodic: bool = False

    @property
    def components(self) -> tuple[Node, Node, Node]:
        return (self.x, self.y, self.z)

    @property
    def periods(self) -> tuple[float | None, float | None]:
        pu = self.u_range[1] - self.u_range[0] if self.u_periodic else None
        pv = self.v_range[1] - self.v_range[0] if self.v_periodic else None
        return pu, pv

    @property
    def diagonal(self) -> float:
        return math.hypot(self.u_range[1] - self.u_range[0], self.v_range[1] - self.v_range[0])

    def wrap(self, u, v):
        """Map parameters into the fundamental rectangle along periodic axes."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.u_periodic:
            a, b = self.u_range
            u = a + np.mod(u - a, b - a)
        if self.v_periodic:
            a, b = self.v_range
            v = a + np.mod(v - a, b - a)
        return u, v

    def contains(self, u, v, slack: float = 1e-12) -> np.ndarray:
        u, v = self.wrap(u, v)
        (a, b), (c, d) = self.u_range, self.v_range
        su, sv = slack * max(1.0, abs(b - a)), slack * max(1.0, abs(d - c))
        return (u >= a - su) & (u <= b + su) & (v >= c - sv) & (v <= d + sv)

    def eval_jet(self, u, v, degree: int = 3) -> tuple[Jet2, Jet2, Jet2]:
        """Jets of (x, y, z) at (u, v); scalar or array base points."""
        if not 0 <= degree <= 5:
            raise ValueError("degree must be between 0 and 5")
        if not np.all(self.contains(u, v)):
            raise EvaluationError(f"point outside the domain of {self.name!r}")
        u, v = self.wrap(u, v)
        u, v = np.broadcast_arrays(u, v)
        uj = Jet2.variable(u, 0, degree)
        vj = Jet2.variable(v, 1, degree)
        out = []
        try:
            for comp in self.components:
                r = eval_node(comp, uj, vj)
                if not isinstance(r, Jet2):
                    r = Jet2.constant(np.broadcast_to(np.asarray(r, dtype=float), u.shape), degree)
                if r.c.shape[1:] != u.shape:
                    r = Jet2(np.broadcast_to(r.c, r.c.shape[:1] + u.shape).copy(), degree)
                out.append(r)
        except J.JetError as exc:
            raise EvaluationError(str(exc)) from exc
        if not all(np.all(np.isfinite(r.c)) for r in out):
            raise EvaluationError(f"non-finite value in {self.name!r}")
        return tuple(out)

    def evaluate(self, u, v) -> np.ndarray:
        x, y, z = self.eval_jet(u, v, 0)
        return np.array([x.value, y.value, z.value])

    def to_text(self) -> str:
        def num(x):
            return repr(float(x))

        lines = [
            f"name = {self.name}",
            f"x = {to_text(self.x)}",
            f"y = {to_text(self.y)}",
            f"z = {to_text(self.z)}",
            f"u_range = {num(self.u_range[0])}..{num(self.u_range[1])}",
            f"v_range = {num(self.v_range[0])}..{num(self.v_range[1])}",
            f"u_periodic = {str(self.u_periodic).lower()}",
            f"v_periodic = {str(self.v_periodic).lower()}",
        ]
        return "\n".join(lines) + "\n"


def _parse_bound(text: str, line: int, col: int) -> float:
    node = parse_expr(text, line, col)
    if _mentions_variable(node):
        raise ExprError("range bounds must be constant", line, col + 1)
    return float(eval_node(node, Jet2.constant(0.0, 0), Jet2.constant(0.0, 0)))


def _mentions_variable(node: Node) -> bool:
    if isinstance(node, Var):
        return True
    if isinstance(node, IntU):
        return True
    for child in ("arg", "left", "right", "base", "exponent", "body"):
        sub = getattr(node, child, None)
        if sub is not None and _mentions_variable(sub):
            return True
    return False


def _parse_bool(text: str, line: int, col: int) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "1"):
        return True
    if t in ("false", "no", "0"):
        return False
    raise ExprError(f"expected true or false, found {text.strip()!r}", line, col)


def parse_surface(text: str) -> SurfaceDef:
    """Parse the ``key = value`` surface file format."""
    fields: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            raise ExprError("expected 'key = value'", lineno, len(line) - len(line.lstrip()) + 1)
        key, value = line.split("=", 1)
        col = len(key) + 1  # column offset of the value text
        key = key.strip()
        if key in fields:
            raise ExprError(f"duplicate key {key!r}", lineno, 1)
        if key == "name":
            fields[key] = value.strip()
        elif key in ("x", "y", "z"):
            fields[key] = parse_expr(value, lineno, col)
        elif key in ("u_range", "v_range"):
            if ".." not in value:
                raise ExprError("range must be written a..b", lineno, col + 1)
            lo, hi = value.split("..", 1)
            a = _parse_bound(lo, lineno, col)
            b = _parse_bound(hi, lineno, col + len(lo) + 2)
            if not b > a:
                raise ExprError("empty range", lineno, col + 1)
            fields[key] = (a, b)
        elif key in ("u_periodic", "v_periodic"):
            fields[key] = _parse_bool(value, lineno, col + 1)
        else:
            raise ExprError(f"unknown key {key!r}", lineno, 1)
    for key in ("x", "y", "z", "u_range", "v_range"):
        if key not in fields:
            raise ExprError(f"missing key {key!r}")
    return SurfaceDef(
        name=fields.get("name", "surface"),
        x=fields["x"],
        y=fields["y"],
        z=fields["z"],
        u_range=fields["u_range"],
        v_range=fields["v_range"],
        u_periodic=fields.get("u_periodic", False),
        v_periodic=fields.get("v_periodic", False),
    )


def load_surface(path) -> SurfaceDef:
    with open(path, encoding="utf-8") as fh:
        return parse_surface(fh.read())


def eval_jet(s: SurfaceDef, p, degree: int = 3) -> tuple[Jet2, Jet2, Jet2]:
    return s.eval_jet(p[0], p[1], degree)
