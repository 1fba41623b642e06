"""Arithmetic expression trees with symbolic differentiation.

The grammar is deliberately small: numbers, named variables, the elementary
functions exp/log/sin/cos/tan/sinh/cosh/tanh/sqrt, unary minus, the four
arithmetic operators, and powers with a *constant* exponent.  Constant
exponents keep differentiation closed over the grammar.  Construction folds
constants (and the arithmetic identities that involve a constant operand)
but performs no other simplification.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ExprSyntaxError, UnboundVariable

FUNCTIONS = ("exp", "log", "sin", "cos", "tan", "sinh", "cosh", "tanh", "sqrt")

_MATH_FN = {name: getattr(math, name) for name in FUNCTIONS}
_NUMPY_FN = {name: getattr(np, name) for name in FUNCTIONS}


class ExpressionAst:
    """Base node; immutable, hashable, safe to share between threads."""

    __slots__ = ()


@dataclass(frozen=True)
class Num(ExpressionAst):
    value: float


@dataclass(frozen=True)
class Var(ExpressionAst):
    name: str


@dataclass(frozen=True)
class Unary(ExpressionAst):
    fn: str  # one of FUNCTIONS or "neg"
    arg: ExpressionAst


@dataclass(frozen=True)
class Binary(ExpressionAst):
    op: str  # + - * /
    left: ExpressionAst
    right: ExpressionAst


@dataclass(frozen=True)
class Power(ExpressionAst):
    base: ExpressionAst
    exponent: float


def _num(value: float) -> Num:
    # negative zero is normalized away so folded trees stay canonical
    return Num(0.0 if value == 0.0 else float(value))


def _is_const(e: ExpressionAst, value=None) -> bool:
    if not isinstance(e, Num):
        return False
    return True if value is None else e.value == value


def add(a: ExpressionAst, b: ExpressionAst) -> ExpressionAst:
    if isinstance(a, Num) and isinstance(b, Num):
        return _num(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return Binary("+", a, b)


def sub(a: ExpressionAst, b: ExpressionAst) -> ExpressionAst:
    if isinstance(a, Num) and isinstance(b, Num):
        return _num(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    return Binary("-", a, b)


def mul(a: ExpressionAst, b: ExpressionAst) -> ExpressionAst:
    if isinstance(a, Num) and isinstance(b, Num):
        return _num(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return _num(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return Binary("*", a, b)


def div(a: ExpressionAst, b: ExpressionAst) -> ExpressionAst:
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        return _num(a.value / b.value)
    if _is_const(b, 1.0):
        return a
    return Binary("/", a, b)


def neg(a: ExpressionAst) -> ExpressionAst:
    if isinstance(a, Num):
        return _num(-a.value)
    if isinstance(a, Unary) and a.fn == "neg":
        return a.arg
    return Unary("neg", a)


def powc(base: ExpressionAst, exponent: float) -> ExpressionAst:
    exponent = float(exponent)
    if exponent == 0.0:
        return _num(1.0)
    if exponent == 1.0:
        return base
    if isinstance(base, Num):
        try:
            return _num(math.pow(base.value, exponent))
        except ValueError:
            pass  # e.g. (-2)^0.5: keep the node, evaluation reports DomainError
    return Power(base, exponent)


def call(fn: str, arg: ExpressionAst) -> ExpressionAst:
    if fn == "neg":
        return neg(arg)
    if isinstance(arg, Num):
        try:
            return _num(_MATH_FN[fn](arg.value))
        except (ValueError, OverflowError):
            pass
    return Unary(fn, arg)


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(source: str):
    tokens = []
    pos = 0
    text = source.replace("−", "-")  # accept the typographic minus
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.start() != pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup == "num":
            tokens.append(("num", float(m.group("num")), pos))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident"), pos))
        else:
            tokens.append(("op", m.group("op"), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, symbol):
        kind, value, pos = self.peek()
        if kind != "op" or value != symbol:
            raise ExprSyntaxError(f"expected {symbol!r}", pos)
        return self.advance()

    def parse_expr(self) -> ExpressionAst:
        node = self.parse_term()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                rhs = self.parse_term()
                node = add(node, rhs) if value == "+" else sub(node, rhs)
            else:
                return node

    def parse_term(self) -> ExpressionAst:
        node = self.parse_factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                rhs = self.parse_factor()
                node = mul(node, rhs) if value == "*" else div(node, rhs)
            else:
                return node

    def parse_factor(self) -> ExpressionAst:
        node = self.parse_base()
        kind, value, pos = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            node = powc(node, self.parse_exponent())
        return node

    def parse_exponent(self) -> float:
        sign = 1.0
        kind, value, pos = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            sign = -1.0
            kind, value, pos = self.peek()
        if kind != "num":
            raise ExprSyntaxError("non-constant exponent", pos)
        self.advance()
        return sign * value

    def parse_base(self) -> ExpressionAst:
        kind, value, pos = self.advance()
        if kind == "num":
            return _num(value)
        if kind == "ident":
            nkind, nvalue, _ = self.peek()
            if nkind == "op" and nvalue == "(":
                if value not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {value!r}", pos)
                self.advance()
                arg = self.parse_expr()
                self.expect_op(")")
                return call(value, arg)
            return Var(value)
        if kind == "op" and value == "(":
            node = self.parse_expr()
            self.expect_op(")")
            return node
        if kind == "op" and value == "-":
            return neg(self.parse_factor())
        raise ExprSyntaxError(f"unexpected token {value!r}", pos)


def parse(source: str) -> ExpressionAst:
    """Parse expression text into an AST with standard precedence."""
    tokens = _tokenize(source)
    if tokens[0][0] == "end":
        raise ExprSyntaxError("empty input", 0)
    parser = _Parser(tokens)
    node = parser.parse_expr()
    kind, value, pos = parser.peek()
    if kind != "end":
        raise ExprSyntaxError(f"unexpected token {value!r}", pos)
    return node


# ---------------------------------------------------------------------------
# differentiation

_DERIV_RULES = {
    "exp": lambda u: call("exp", u),
    "log": lambda u: div(_num(1.0), u),
    "sin": lambda u: call("cos", u),
    "cos": lambda u: neg(call("sin", u)),
    "tan": lambda u: div(_num(1.0), powc(call("cos", u), 2.0)),
    "sinh": lambda u: call("cosh", u),
    "cosh": lambda u: call("sinh", u),
    "tanh": lambda u: div(_num(1.0), powc(call("cosh", u), 2.0)),
    "sqrt": lambda u: div(_num(1.0), mul(_num(2.0), call("sqrt", u))),
}


def differentiate(e: ExpressionAst, var: str) -> ExpressionAst:
    """Exact symbolic derivative of ``e`` with respect to ``var``."""
    if isinstance(e, Num):
        return _num(0.0)
    if isinstance(e, Var):
        return _num(1.0 if e.name == var else 0.0)
    if isinstance(e, Unary):
        du = differentiate(e.arg, var)
        if e.fn == "neg":
            return neg(du)
        return mul(_DERIV_RULES[e.fn](e.arg), du)
    if isinstance(e, Binary):
        da = differentiate(e.left, var)
        db = differentiate(e.right, var)
        if e.op == "+":
            return add(da, db)
        if e.op == "-":
            return sub(da, db)
        if e.op == "*":
            return add(mul(da, e.right), mul(e.left, db))
        return div(sub(mul(da, e.right), mul(e.left, db)), powc(e.right, 2.0))
    if isinstance(e, Power):
        du = differentiate(e.base, var)
        return mul(mul(_num(e.exponent), powc(e.base, e.exponent - 1.0)), du)
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# evaluation

def evaluate(e: ExpressionAst, bindings: dict) -> float:
    """IEEE double evaluation at a point; raises on domain violations."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return float(bindings[e.name])
        except KeyError:
            raise UnboundVariable(f"variable {e.name!r} is not bound") from None
    if isinstance(e, Unary):
        v = evaluate(e.arg, bindings)
        if e.fn == "neg":
            return -v
        try:
            return _MATH_FN[e.fn](v)
        except (ValueError, OverflowError) as exc:
            raise DomainError(f"{e.fn}({v!r}): {exc}") from None
    if isinstance(e, Binary):
        a = evaluate(e.left, bindings)
        b = evaluate(e.right, bindings)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0.0:
            raise DomainError(f"division by zero: {a!r}/0")
        return a / b
    if isinstance(e, Power):
        base = evaluate(e.base, bindings)
        try:
            return math.pow(base, e.exponent)
        except (ValueError, OverflowError) as exc:
            raise DomainError(f"{base!r}^{e.exponent!r}: {exc}") from None
    raise TypeError(f"not an expression node: {e!r}")


def eval_many(e: ExpressionAst, bindings: dict) -> np.ndarray:
    """Vectorized evaluation over numpy arrays.

    Domain violations yield nan/inf instead of raising; callers on the grid
    paths validate finiteness where it matters.
    """
    with np.errstate(all="ignore"):
        out = np.asarray(_eval_many(e, bindings), dtype=float)
    # constant subtrees evaluate to scalars; broadcast to the binding shape
    for v in bindings.values():
        shape = np.shape(v)
        if shape and out.shape != shape:
            return np.broadcast_to(out, shape).copy()
        if shape:
            return out
    return out


def _eval_many(e, bindings):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return bindings[e.name]
        except KeyError:
            raise UnboundVariable(f"variable {e.name!r} is not bound") from None
    if isinstance(e, Unary):
        v = _eval_many(e.arg, bindings)
        if e.fn == "neg":
            return np.negative(v)
        return _NUMPY_FN[e.fn](v)
    if isinstance(e, Binary):
        a = _eval_many(e.left, bindings)
        b = _eval_many(e.right, bindings)
        if e.op == "+":
            return np.add(a, b)
        if e.op == "-":
            return np.subtract(a, b)
        if e.op == "*":
            return np.multiply(a, b)
        return np.divide(a, b)
    if isinstance(e, Power):
        return np.power(_eval_many(e.base, bindings), e.exponent)
    raise TypeError(f"not an expression node: {e!r}")


def variables(e: ExpressionAst) -> set:
    """Free variable names appearing in the expression."""
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Unary):
        return variables(e.arg)
    if isinstance(e, Binary):
        return variables(e.left) | variables(e.right)
    if isinstance(e, Power):
        return variables(e.base)
    return set()


# ---------------------------------------------------------------------------
# serialization

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(e: ExpressionAst) -> int:
    if isinstance(e, Binary):
        return _PREC_ADD if e.op in "+-" else _PREC_MUL
    if isinstance(e, Unary):
        return _PREC_NEG if e.fn == "neg" else _PREC_ATOM
    if isinstance(e, Power):
        return _PREC_POW
    if isinstance(e, Num) and e.value < 0:
        return _PREC_NEG
    return _PREC_ATOM


def _fmt_number(v: float) -> str:
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def to_source(e: ExpressionAst) -> str:
    """Canonical text form; parse(to_source(e)) evaluates identically to e."""
    if isinstance(e, Num):
        return _fmt_number(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.fn == "neg":
            inner = to_source(e.arg)
            if _prec(e.arg) < _PREC_NEG:
                inner = f"({inner})"
            return f"-{inner}"
        return f"{e.fn}({to_source(e.arg)})"
    if isinstance(e, Binary):
        lhs = to_source(e.left)
        rhs = to_source(e.right)
        p = _prec(e)
        if _prec(e.left) < p:
            lhs = f"({lhs})"
        # right operand at equal precedence keeps parens so reparsing never
        # reassociates (float addition/multiplication are not associative)
        if _prec(e.right) <= p:
            rhs = f"({rhs})"
        return f"{lhs}{e.op}{rhs}"
    if isinstance(e, Power):
        base = to_source(e.base)
        if _prec(e.base) < _PREC_ATOM:
            base = f"({base})"
        return f"{base}^{_fmt_number(e.exponent)}"
    raise TypeError(f"not an expression node: {e!r}")
