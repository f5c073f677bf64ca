"""Scalar expression language for coefficients and nonlinearities.

All user-supplied functions (the coefficients ``a_plus``/``a_minus``, the
nonlinearity ``f`` and its limits ``f_plus``/``f_minus``) are written as
strings over a small grammar:

    expr    :=  term (('+' | '-') term)*
    term    :=  unary (('*' | '/') unary)*
    unary   :=  '-' unary | power
    power   :=  atom ('^' unary)?            # right associative
    atom    :=  NUMBER | 'pi' | 'e' | 'x' | 'xi'
             |  NAME '(' expr (',' expr)* ')'
             |  '(' expr ')'

Functions: sin, cos, tan, atan, exp, log, tanh, abs, sgn (unary) and
min, max (binary).  ``sgn(0)`` evaluates to 0, matching the convention
``phi_p(0) = 0`` used throughout the numerics.

Parsed expressions are immutable trees; evaluation is reentrant and never
returns NaN or infinity -- domain violations (``log`` of a non-positive
number, division by zero, fractional powers of negative numbers, overflow)
raise :class:`EvalError` instead of propagating silently into the ODE
integrator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Union

__all__ = [
    "Expr", "Num", "Const", "Var", "Neg", "Bin", "Call",
    "ExprError", "ParseError", "EvalError", "DerivativeError",
    "parse", "evaluate", "diff_xi", "to_str", "free_vars",
    "compile_expr",
]


class ExprError(ValueError):
    """Base class for expression-language errors."""


class ParseError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvalError(ExprError):
    """Domain error during evaluation (log of non-positive, 1/0, ...)."""


class DerivativeError(ExprError):
    """Non-differentiable primitive in a xi-dependent subtree."""


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str  # 'pi' | 'e'


@dataclass(frozen=True)
class Var:
    name: str  # 'x' | 'xi'


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Bin:
    op: str  # '+', '-', '*', '/', '^'
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple["Expr", ...]


Expr = Union[Num, Const, Var, Neg, Bin, Call]

_CONSTS = {"pi": math.pi, "e": math.e}
_VARS = ("x", "xi")
_FUNCS = {  # name -> arity
    "sin": 1, "cos": 1, "tan": 1, "atan": 1, "exp": 1, "log": 1,
    "tanh": 1, "abs": 1, "sgn": 1, "min": 2, "max": 2,
}


# ---------------------------------------------------------------------------
# Tokenizer / parser
# ---------------------------------------------------------------------------

_OPS = set("+-*/^(),")


def _tokens(src: str) -> Iterator[tuple[str, str, int]]:
    i, n = 0, len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPS:
            yield ("op", c, i)
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            while j < n and (src[j].isdigit() or src[j] == "."):
                j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            try:
                float(src[i:j])
            except ValueError:
                raise ParseError(f"malformed number {src[i:j]!r}", i) from None
            yield ("num", src[i:j], i)
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            yield ("name", src[i:j], i)
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    yield ("end", "", n)


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = list(_tokens(src))
        self.pos = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.pos]

    def next(self) -> tuple[str, str, int]:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> None:
        kind, tok, off = self.next()
        if tok != text:
            raise ParseError(f"expected {text!r}, found {tok or 'end of input'!r}", off)

    def parse(self) -> Expr:
        e = self.expr()
        kind, tok, off = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {tok!r}", off)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            e = Bin(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.next()[1]
            e = Bin(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.peek()[1] == "-":
            self.next()
            inner = self.unary()
            # fold '-' applied directly to a literal, so printed negative
            # constants round-trip to a structurally equal tree
            if isinstance(inner, Num):
                return Num(-inner.value)
            return Neg(inner)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[1] == "^":
            self.next()
            return Bin("^", base, self.unary())  # right associative
        return base

    def atom(self) -> Expr:
        kind, tok, off = self.next()
        if kind == "num":
            return Num(float(tok))
        if kind == "name":
            if self.peek()[1] == "(":
                if tok not in _FUNCS:
                    raise ParseError(f"unknown function {tok!r}", off)
                self.next()
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.next()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != _FUNCS[tok]:
                    raise ParseError(
                        f"{tok} takes {_FUNCS[tok]} argument(s), got {len(args)}", off)
                return Call(tok, tuple(args))
            if tok in _CONSTS:
                return Const(tok)
            if tok in _VARS:
                return Var(tok)
            raise ParseError(f"unknown identifier {tok!r}", off)
        if tok == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected {tok or 'end of input'!r}", off)


def parse(src: str) -> Expr:
    """Parse ``src`` into an expression tree.

    Raises :class:`ParseError` (with the byte offset of the problem) on
    malformed input, unknown identifiers or wrong function arity.
    """
    if not src or not src.strip():
        raise ParseError("empty expression", 0)
    return _Parser(src).parse()


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _sgn(s: float) -> float:
    if s > 0.0:
        return 1.0
    if s < 0.0:
        return -1.0
    return 0.0


def _checked_log(v: float) -> float:
    if v <= 0.0:
        raise EvalError(f"log of non-positive value {v!r}")
    return math.log(v)


def _checked_div(a: float, b: float) -> float:
    if b == 0.0:
        raise EvalError("division by zero")
    return a / b


def _checked_pow(a: float, b: float) -> float:
    if a == 0.0 and b < 0.0:
        raise EvalError("zero raised to a negative power")
    if a < 0.0 and b != math.floor(b):
        raise EvalError(f"fractional power of negative base {a!r}")
    try:
        r = a ** b
    except OverflowError:
        raise EvalError("overflow in power") from None
    if isinstance(r, complex):  # unreachable given the guards, kept as belt
        raise EvalError("complex result in power")
    return r


def free_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Neg):
        return free_vars(e.arg)
    if isinstance(e, Bin):
        return free_vars(e.lhs) | free_vars(e.rhs)
    if isinstance(e, Call):
        out: frozenset[str] = frozenset()
        for a in e.args:
            out |= free_vars(a)
        return out
    return frozenset()


def evaluate(e: Expr, x: float | None = None, xi: float | None = None) -> float:
    """Evaluate ``e`` at the given bindings in IEEE double precision.

    Unbound variables and domain violations raise :class:`EvalError`; the
    result is always a finite float.
    """
    r = _eval(e, x, xi)
    if not math.isfinite(r):
        raise EvalError(f"non-finite result {r!r}")
    return r


def _eval(e: Expr, x, xi) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Const):
        return _CONSTS[e.name]
    if isinstance(e, Var):
        v = x if e.name == "x" else xi
        if v is None:
            raise EvalError(f"unbound variable {e.name!r}")
        return float(v)
    if isinstance(e, Neg):
        return -_eval(e.arg, x, xi)
    if isinstance(e, Bin):
        a = _eval(e.lhs, x, xi)
        b = _eval(e.rhs, x, xi)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            return _checked_div(a, b)
        return _checked_pow(a, b)
    # Call
    args = [_eval(a, x, xi) for a in e.args]
    fn = e.fn
    try:
        if fn == "sin":
            return math.sin(args[0])
        if fn == "cos":
            return math.cos(args[0])
        if fn == "tan":
            return math.tan(args[0])
        if fn == "atan":
            return math.atan(args[0])
        if fn == "exp":
            return math.exp(args[0])
        if fn == "log":
            return _checked_log(args[0])
        if fn == "tanh":
            return math.tanh(args[0])
        if fn == "abs":
            return abs(args[0])
        if fn == "sgn":
            return _sgn(args[0])
        if fn == "min":
            return min(args)
        return max(args)
    except OverflowError:
        raise EvalError(f"overflow in {fn}") from None


# ---------------------------------------------------------------------------
# Symbolic derivative in xi
# ---------------------------------------------------------------------------

def _is_zero(e: Expr) -> bool:
    return isinstance(e, Num) and e.value == 0.0


def _is_one(e: Expr) -> bool:
    return isinstance(e, Num) and e.value == 1.0


def _add(a: Expr, b: Expr) -> Expr:
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    if isinstance(a, Num) and isinstance(b, Num) and math.isfinite(a.value + b.value):
        return Num(a.value + b.value)
    return Bin("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_zero(b):
        return a
    if isinstance(a, Num) and isinstance(b, Num) and math.isfinite(a.value - b.value):
        return Num(a.value - b.value)
    if _is_zero(a):
        return Neg(b)
    return Bin("-", a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if _is_zero(a) or _is_zero(b):
        return Num(0.0)
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    if isinstance(a, Num) and isinstance(b, Num) and math.isfinite(a.value * b.value):
        return Num(a.value * b.value)
    return Bin("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if _is_zero(a):
        return Num(0.0)
    if _is_one(b):
        return a
    return Bin("/", a, b)


def _pow(a: Expr, b: Expr) -> Expr:
    if _is_one(b):
        return a
    if _is_zero(b):
        return Num(1.0)
    return Bin("^", a, b)


def diff_xi(e: Expr) -> Expr:
    """Symbolic derivative of ``e`` with respect to ``xi``.

    ``abs``, ``sgn``, ``min`` and ``max`` are rejected when their arguments
    depend on xi (they are not differentiable); subtrees that do not involve
    xi differentiate to 0 regardless of content.
    """
    if "xi" not in free_vars(e):
        return Num(0.0)
    if isinstance(e, Var):  # must be xi here
        return Num(1.0)
    if isinstance(e, Neg):
        return Neg(diff_xi(e.arg))
    if isinstance(e, Bin):
        a, b, da, db = e.lhs, e.rhs, diff_xi(e.lhs), diff_xi(e.rhs)
        if e.op == "+":
            return _add(da, db)
        if e.op == "-":
            return _sub(da, db)
        if e.op == "*":
            return _add(_mul(da, b), _mul(a, db))
        if e.op == "/":
            return _div(_sub(_mul(da, b), _mul(a, db)), _pow(b, Num(2.0)))
        # power
        if "xi" not in free_vars(b):
            return _mul(_mul(b, _pow(a, _sub(b, Num(1.0)))), da)
        if "xi" not in free_vars(a):
            return _mul(_mul(_pow(a, b), Call("log", (a,))), db)
        return _mul(_pow(a, b),
                    _add(_mul(db, Call("log", (a,))), _div(_mul(b, da), a)))
    # Call
    u = e.args[0]
    du = diff_xi(u)
    if e.fn == "sin":
        return _mul(Call("cos", (u,)), du)
    if e.fn == "cos":
        return Neg(_mul(Call("sin", (u,)), du))
    if e.fn == "tan":
        return _div(du, _pow(Call("cos", (u,)), Num(2.0)))
    if e.fn == "atan":
        return _div(du, _add(Num(1.0), _pow(u, Num(2.0))))
    if e.fn == "exp":
        return _mul(Call("exp", (u,)), du)
    if e.fn == "log":
        return _div(du, u)
    if e.fn == "tanh":
        return _mul(_sub(Num(1.0), _pow(Call("tanh", (u,)), Num(2.0))), du)
    raise DerivativeError(f"{e.fn} is not differentiable in a xi-dependent subtree")


# ---------------------------------------------------------------------------
# Pretty printer (round-trips through parse to a structurally equal tree)
# ---------------------------------------------------------------------------

def _prec(e: Expr) -> int:
    if isinstance(e, Bin):
        return {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}[e.op]
    if isinstance(e, Neg):
        return 3
    if isinstance(e, Num) and math.copysign(1.0, e.value) < 0:
        return 3  # prints with a leading '-', same binding as unary minus
    return 5


def to_str(e: Expr) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        inner = to_str(e.arg)
        if _prec(e.arg) < 3 or isinstance(e.arg, Neg):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Call):
        return f"{e.fn}({', '.join(to_str(a) for a in e.args)})"
    lhs, rhs = to_str(e.lhs), to_str(e.rhs)
    p = _prec(e)
    # left operand: parenthesize on strictly lower precedence (left assoc),
    # for '^' also on equal precedence since '^' is right associative
    if _prec(e.lhs) < p or (e.op == "^" and _prec(e.lhs) <= p):
        lhs = f"({lhs})"
    # right operand of a left-associative op needs parens on equal precedence
    # too, otherwise a right-nested tree reparses left-nested
    if _prec(e.rhs) < p or (e.op != "^" and _prec(e.rhs) == p):
        rhs = f"({rhs})"
    return f"{lhs} {e.op} {rhs}" if e.op in "+-" else f"{lhs}{e.op}{rhs}"


# ---------------------------------------------------------------------------
# Compilation to fast callables
# ---------------------------------------------------------------------------

def _codegen(e: Expr) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Const):
        return repr(_CONSTS[e.name])
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{_codegen(e.arg)})"
    if isinstance(e, Bin):
        a, b = _codegen(e.lhs), _codegen(e.rhs)
        if e.op == "/":
            return f"_div({a}, {b})"
        if e.op == "^":
            return f"_pow({a}, {b})"
        return f"({a} {e.op} {b})"
    args = ", ".join(_codegen(a) for a in e.args)
    return f"_{e.fn}({args})"


def _checked_exp(v: float) -> float:
    try:
        return math.exp(v)
    except OverflowError:
        raise EvalError("overflow in exp") from None


_COMPILE_NS = {
    "_sin": math.sin, "_cos": math.cos, "_tan": math.tan, "_atan": math.atan,
    "_exp": _checked_exp, "_log": _checked_log, "_tanh": math.tanh,
    "_abs": abs, "_sgn": _sgn, "_min": min, "_max": max,
    "_div": _checked_div, "_pow": _checked_pow,
    "_isfinite": math.isfinite, "_EvalError": EvalError,
}


def compile_expr(e: Expr) -> Callable[[float, float], float]:
    """Compile an expression tree into a fast ``f(x, xi) -> float``.

    Code is generated from the validated AST only (never from raw input)
    and runs against a fixed namespace of checked math primitives, so the
    compiled form keeps the same domain-error and no-NaN guarantees as
    :func:`evaluate`.
    """
    body = _codegen(e)
    src = (
        "def _expr_fn(x=0.0, xi=0.0):\n"
        f"    _r = {body}\n"
        "    if not _isfinite(_r):\n"
        "        raise _EvalError('non-finite result %r' % (_r,))\n"
        "    return _r\n"
    )
    ns = dict(_COMPILE_NS)
    exec(compile(src, "<halfspec-expr>", "exec"), ns)  # noqa: S102 - AST-derived source only
    return ns["_expr_fn"]
