"""Small symbolic expression engine.

Formulas are parsed into immutable trees that can be differentiated
symbolically and evaluated either pointwise (with precise domain errors) or
over numpy arrays (domain violations become nan/inf).

Grammar::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := primary ('^' unary)?
    primary := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so ``-x^2``
is ``-(x^2)`` and ``2^-x`` is ``2^(-x)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

__all__ = [
    "Expr", "Const", "Var", "Unary", "Binary",
    "ExprError", "ParseError", "UnknownFunctionError",
    "EvaluationError", "UnboundVariableError", "DomainError",
    "parse", "differentiate", "evaluate", "compile_numpy",
    "variables", "substitute", "const", "var",
]

FUNCTIONS = ("exp", "log", "sqrt", "abs", "sign", "atan")
CONSTANTS = {"pi": math.pi, "e": math.e}


class ExprError(Exception):
    pass


class ParseError(ExprError):
    """Syntax error; ``offset`` is the byte offset into the source text."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnknownFunctionError(ParseError):
    pass


class EvaluationError(ExprError):
    pass


class UnboundVariableError(EvaluationError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound variable {name!r}")


class DomainError(EvaluationError):
    def __init__(self, message: str, subexpr: "Expr"):
        self.subexpr = subexpr
        super().__init__(f"{message} in {subexpr}")


# ---------------------------------------------------------------------------
# Tree nodes
# ---------------------------------------------------------------------------

class Expr:
    """Base class of expression nodes. Nodes are immutable and hashable."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, _coerce(other))

    def __radd__(self, other):
        return add(_coerce(other), self)

    def __sub__(self, other):
        return sub(self, _coerce(other))

    def __rsub__(self, other):
        return sub(_coerce(other), self)

    def __mul__(self, other):
        return mul(self, _coerce(other))

    def __rmul__(self, other):
        return mul(_coerce(other), self)

    def __truediv__(self, other):
        return div(self, _coerce(other))

    def __rtruediv__(self, other):
        return div(_coerce(other), self)

    def __pow__(self, other):
        return power(self, _coerce(other))

    def __neg__(self):
        return neg(self)

    def sexpr(self) -> str:
        """Prefix form used for structural comparisons, e.g. ``div(1,x)``."""
        raise NotImplementedError


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: float
    name: str | None = None

    def __str__(self):
        if self.name:
            return self.name
        text = repr(float(self.value))
        return f"({text})" if self.value < 0 else text

    def sexpr(self):
        if self.name:
            return self.name
        v = float(self.value)
        return str(int(v)) if v.is_integer() and abs(v) < 1e15 else repr(v)


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str

    def __str__(self):
        return self.name

    def sexpr(self):
        return self.name


@dataclass(frozen=True, eq=True)
class Unary(Expr):
    op: str  # "neg" or one of FUNCTIONS
    arg: Expr

    def __str__(self):
        if self.op == "neg":
            return f"(-{self.arg})"
        return f"{self.op}({self.arg})"

    def sexpr(self):
        return f"{self.op}({self.arg.sexpr()})"


_SYMBOLS = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}


@dataclass(frozen=True, eq=True)
class Binary(Expr):
    op: str  # add, sub, mul, div, pow
    left: Expr
    right: Expr

    def __str__(self):
        return f"({self.left} {_SYMBOLS[self.op]} {self.right})"

    def sexpr(self):
        return f"{self.op}({self.left.sexpr()},{self.right.sexpr()})"


def _coerce(value) -> Expr:
    if isinstance(value, Expr):
        return value
    return Const(float(value))


def const(value: float) -> Const:
    return Const(float(value))


def var(name: str) -> Var:
    return Var(name)


ZERO = Const(0.0)
ONE = Const(1.0)


def _is_const(e: Expr, value: float | None = None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


# Constructors with trivial constant folding; used by differentiate and the
# operator overloads. The parser builds raw nodes.

def add(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    return Binary("add", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return neg(b)
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    return Binary("sub", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    return Binary("mul", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 1.0):
        return a
    if _is_const(a, 0.0) and not _is_const(b, 0.0):
        return ZERO
    return Binary("div", a, b)


def power(a: Expr, b: Expr) -> Expr:
    if _is_const(b, 1.0):
        return a
    if _is_const(b, 0.0):
        return ONE
    return Binary("pow", a, b)


def neg(a: Expr) -> Expr:
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Unary) and a.op == "neg":
        return a.arg
    return Unary("neg", a)


def func(name: str, a: Expr) -> Expr:
    return Unary(name, a)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", _offset(text, pos), text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def _offset(text: str, pos: int) -> int:
    # byte offset, not character index
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, message, cls=ParseError):
        return cls(message, _offset(self.text, self.tok[2]), self.text)

    def accept(self, value: str) -> bool:
        if self.tok[0] == "op" and self.tok[1] == value:
            self.i += 1
            return True
        return False

    def expect(self, value: str):
        if not self.accept(value):
            found = self.tok[1] or "end of input"
            raise self.error(f"expected {value!r}, found {found!r}")

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok[0] != "end":
            raise self.error(f"unexpected token {self.tok[1]!r}")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while True:
            if self.accept("+"):
                left = Binary("add", left, self.term())
            elif self.accept("-"):
                left = Binary("sub", left, self.term())
            else:
                return left

    def term(self) -> Expr:
        left = self.unary()
        while True:
            if self.accept("*"):
                left = Binary("mul", left, self.unary())
            elif self.accept("/"):
                left = Binary("div", left, self.unary())
            else:
                return left

    def unary(self) -> Expr:
        if self.accept("-"):
            return Unary("neg", self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.accept("^"):
            return Binary("pow", base, self.unary())
        return base

    def primary(self) -> Expr:
        kind, value, _ = self.tok
        if kind == "num":
            self.i += 1
            return Const(float(value))
        if kind == "ident":
            if self.tokens[self.i + 1][:2] == ("op", "("):
                if value not in FUNCTIONS:
                    raise self.error(f"unknown function {value!r}", UnknownFunctionError)
                self.i += 2
                arg = self.expr()
                self.expect(")")
                return Unary(value, arg)
            self.i += 1
            if value in CONSTANTS:
                return Const(CONSTANTS[value], value)
            return Var(value)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        found = value or "end of input"
        raise self.error(f"unexpected token {found!r}")


def parse(text: str) -> Expr:
    """Parse a formula string into an expression tree."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Analysis and differentiation
# ---------------------------------------------------------------------------

def variables(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset([e.name])
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Unary):
        return variables(e.arg)
    return variables(e.left) | variables(e.right)


def substitute(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    """Replace variables by expressions (no folding of the result)."""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, Unary):
        return Unary(e.op, substitute(e.arg, mapping))
    return Binary(e.op, substitute(e.left, mapping), substitute(e.right, mapping))


def _depends(e: Expr, name: str) -> bool:
    return name in variables(e)


def differentiate(e: Expr, name: str) -> Expr:
    """Symbolic partial derivative of ``e`` with respect to variable ``name``.

    ``abs`` differentiates to ``sign`` and ``sign`` to zero, which is exact
    away from the zero set of the argument.
    """
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == name else ZERO
    if isinstance(e, Unary):
        u = e.arg
        du = differentiate(u, name)
        if _is_const(du, 0.0):
            return ZERO
        op = e.op
        if op == "neg":
            return neg(du)
        if op == "exp":
            return mul(e, du)
        if op == "log":
            return div(du, u)
        if op == "sqrt":
            return div(du, mul(Const(2.0), e))
        if op == "abs":
            return mul(Unary("sign", u), du)
        if op == "sign":
            return ZERO
        if op == "atan":
            return div(du, add(ONE, power(u, Const(2.0))))
        raise ValueError(f"unknown unary op {op!r}")

    a, b = e.left, e.right
    op = e.op
    if op in ("add", "sub"):
        da, db = differentiate(a, name), differentiate(b, name)
        return add(da, db) if op == "add" else sub(da, db)
    if op == "mul":
        return add(mul(differentiate(a, name), b), mul(a, differentiate(b, name)))
    if op == "div":
        da, db = differentiate(a, name), differentiate(b, name)
        if _is_const(db, 0.0):
            return div(da, b)
        return div(sub(mul(da, b), mul(a, db)), power(b, Const(2.0)))
    if op == "pow":
        if not _depends(b, name):
            da = differentiate(a, name)
            if _is_const(b):
                lowered = Const(b.value - 1.0)
            else:
                lowered = sub(b, ONE)
            return mul(mul(b, power(a, lowered)), da)
        db = differentiate(b, name)
        if not _depends(a, name):
            return mul(mul(e, Unary("log", a)), db)
        da = differentiate(a, name)
        return mul(e, add(mul(db, Unary("log", a)), div(mul(b, da), a)))
    raise ValueError(f"unknown binary op {op!r}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _sign(x: float) -> float:
    return 0.0 if x == 0 else math.copysign(1.0, x)


def _pow(base: float, exponent: float, e: Expr) -> float:
    if float(exponent).is_integer():
        if base == 0 and exponent < 0:
            raise DomainError("zero raised to a negative power", e)
        try:
            return float(base) ** int(exponent)
        except OverflowError:
            return math.copysign(math.inf, base) if int(exponent) % 2 else math.inf
    if base < 0 or (base == 0 and exponent < 0):
        raise DomainError("non-integer power of a non-positive base", e)
    if base == 0:
        return 0.0
    try:
        return math.pow(base, exponent)
    except OverflowError:
        return math.inf


def evaluate(e: Expr, bindings: Mapping[str, float] | None = None, **kw: float) -> float:
    """Evaluate ``e`` at a point. Raises on unbound names and domain errors."""
    env = dict(bindings or {})
    env.update(kw)
    return _eval(e, env)


def _eval(e: Expr, env: Mapping[str, float]) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return float(env[e.name])
        except KeyError:
            raise UnboundVariableError(e.name) from None
    if isinstance(e, Unary):
        x = _eval(e.arg, env)
        op = e.op
        if op == "neg":
            return -x
        if op == "exp":
            try:
                return math.exp(x)
            except OverflowError:
                return math.inf
        if op == "log":
            if x <= 0:
                raise DomainError("log of non-positive value", e)
            return math.log(x)
        if op == "sqrt":
            if x < 0:
                raise DomainError("sqrt of negative value", e)
            return math.sqrt(x)
        if op == "abs":
            return abs(x)
        if op == "sign":
            return _sign(x)
        if op == "atan":
            return math.atan(x)
        raise ValueError(f"unknown unary op {op!r}")
    a = _eval(e.left, env)
    b = _eval(e.right, env)
    op = e.op
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise DomainError("division by zero", e)
        return a / b
    if op == "pow":
        return _pow(a, b, e)
    raise ValueError(f"unknown binary op {op!r}")


_NP_UNARY: dict[str, Callable] = {
    "neg": np.negative,
    "exp": np.exp,
    "log": lambda x: np.log(np.where(x > 0, x, np.nan)),
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sign": np.sign,
    "atan": np.arctan,
}


def _np_pow(a, b):
    b_arr = np.asarray(b, dtype=float)
    integral = np.equal(np.mod(b_arr, 1.0), 0.0)
    bad = ~integral & (np.asarray(a) < 0)
    out = np.power(a, b)
    return np.where(bad, np.nan, out)


_NP_BINARY: dict[str, Callable] = {
    "add": np.add,
    "sub": np.subtract,
    "mul": np.multiply,
    "div": lambda a, b: np.divide(a, np.where(np.equal(b, 0), np.nan, b)),
    "pow": _np_pow,
}


def compile_numpy(e: Expr, names: Sequence[str]) -> Callable[..., np.ndarray]:
    """Build a vectorized evaluator ``f(*arrays)`` with positional variables.

    Domain violations produce nan (or inf on overflow) instead of raising;
    callers that integrate or sweep check finiteness themselves.
    """
    index = {n: i for i, n in enumerate(names)}
    missing = variables(e) - set(index)
    if missing:
        raise UnboundVariableError(sorted(missing)[0])

    def build(node: Expr) -> Callable:
        if isinstance(node, Const):
            v = node.value
            return lambda args: v
        if isinstance(node, Var):
            k = index[node.name]
            return lambda args: args[k]
        if isinstance(node, Unary):
            f = _NP_UNARY[node.op]
            g = build(node.arg)
            return lambda args: f(g(args))
        f = _NP_BINARY[node.op]
        gl, gr = build(node.left), build(node.right)
        return lambda args: f(gl(args), gr(args))

    body = build(e)

    def fn(*args):
        arrays = [np.asarray(a, dtype=float) for a in args]
        with np.errstate(all="ignore"):
            out = body(arrays)
        shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()
        return np.broadcast_to(np.asarray(out, dtype=float), shape).copy()

    return fn
