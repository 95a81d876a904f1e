"""Small rational expression language.

Grammar (standard precedence, ``+ - * /`` left-associative, ``^`` right-associative)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" INT)?
    atom   := INT | NAME | "(" expr ")"

Exponents are non-negative integer literals.  There are no functions: every
object handled here is rational in its variables.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Union

from .algebra import GF, LaurentSeries
from .errors import DomainError, PrecisionExhausted, SpecError


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exp: int


Expr = Union[Const, Sym, Neg, BinOp, Pow]


# ---------------------------------------------------------------------------
# tokenizer / parser
# ---------------------------------------------------------------------------

def tokenize(text: str) -> list[tuple[str, str, int]]:
    """Tokens as (kind, text, offset); kinds are INT, NAME, OP, END."""
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            out.append(("INT", text[i:j], i))
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            out.append(("NAME", text[i:j], i))
            i = j
        elif ch in "+-*/^()":
            out.append(("OP", ch, i))
            i += 1
        else:
            raise SpecError(f"unexpected character {ch!r}", i)
    out.append(("END", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, symbols):
        self.toks = tokenize(text)
        self.pos = 0
        self.symbols = None if symbols is None else set(symbols)

    def peek(self):
        return self.toks[self.pos]

    def take(self):
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, text):
        kind, val, off = self.take()
        if val != text or kind != "OP":
            raise SpecError(f"expected {text!r}, found {val or 'end of input'!r}", off)

    def parse(self) -> Expr:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "END":
            raise SpecError(f"unexpected token {val!r}", off)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "OP":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "OP":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[:2] == ("OP", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[:2] == ("OP", "^"):
            self.take()
            kind, val, off = self.take()
            if kind != "INT":
                raise SpecError("exponent must be a non-negative integer literal", off)
            exp = int(val)
            # right associativity: a^2^3 = a^(2^3)
            while self.peek()[:2] == ("OP", "^"):
                self.take()
                kind, val, off = self.take()
                if kind != "INT":
                    raise SpecError("exponent must be a non-negative integer literal", off)
                exp = exp ** int(val)
            return Pow(base, exp)
        return base

    def atom(self):
        kind, val, off = self.take()
        if kind == "INT":
            return Const(Fraction(int(val)))
        if kind == "NAME":
            if self.symbols is not None and val not in self.symbols:
                raise SpecError(f"undeclared symbol {val!r}", off)
            return Sym(val)
        if (kind, val) == ("OP", "("):
            node = self.expr()
            self.expect(")")
            return node
        raise SpecError(f"unexpected {val or 'end of input'!r}", off)


def parse_expr(text: str, symbols: Iterable[str] | None = None) -> Expr:
    """Parse ``text``; every identifier must be in ``symbols`` (unless it is None)."""
    return _Parser(text, symbols).parse()


def free_symbols(node: Expr) -> set[str]:
    if isinstance(node, Sym):
        return {node.name}
    if isinstance(node, Const):
        return set()
    if isinstance(node, Neg):
        return free_symbols(node.arg)
    if isinstance(node, Pow):
        return free_symbols(node.base)
    return free_symbols(node.left) | free_symbols(node.right)


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_text(node: Expr) -> str:
    """Print with the minimum parentheses needed to parse back to the same tree."""
    return _show(node, 0)


def _show(node, ctx):
    if isinstance(node, Const):
        v = node.value
        if v.denominator == 1 and v >= 0:
            return str(v.numerator)
        return f"({v.numerator}/{v.denominator})" if v.denominator != 1 else f"({v.numerator})"
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Neg):
        s = "-" + _show(node.arg, 3)
        return f"({s})" if ctx > 3 else s
    if isinstance(node, Pow):
        return f"{_show(node.base, 5)}^{node.exp}"
    p = _PREC[node.op]
    s = f"{_show(node.left, p)} {node.op} {_show(node.right, p + 1)}"
    return f"({s})" if ctx > p else s


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def eval_expr(node: Expr, env: Mapping[str, object], lift=None):
    """Evaluate over whatever ring the values in ``env`` live in.

    Constants stay ``Fraction`` (or go through ``lift``, e.g. into a prime
    field) and are absorbed by the ring's reflected operators; float
    environments therefore evaluate in floating point.
    """
    if isinstance(node, Const):
        return node.value if lift is None else lift(node.value)
    if isinstance(node, Sym):
        try:
            return env[node.name]
        except KeyError:
            raise DomainError(f"unbound symbol {node.name!r}") from None
    if isinstance(node, Neg):
        return -eval_expr(node.arg, env, lift)
    if isinstance(node, Pow):
        base = eval_expr(node.base, env, lift)
        if node.exp == 0:
            return Fraction(1) if lift is None else lift(Fraction(1))
        out = base
        for _ in range(node.exp - 1):
            out = out * base
        return out
    a = eval_expr(node.left, env, lift)
    b = eval_expr(node.right, env, lift)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    return _divide(a, b)


def _divide(a, b):
    if isinstance(b, LaurentSeries):
        return a / b  # PrecisionExhausted propagates
    if isinstance(b, (int, Fraction, GF)) and b == 0:
        raise DomainError("division by exact zero")
    if isinstance(b, float) and b == 0.0:
        raise DomainError("division by zero")
    try:
        return a / b
    except ZeroDivisionError:
        raise DomainError("division by exact zero") from None


def compile_expr(node: Expr) -> Callable[[Mapping[str, object]], object]:
    """Closure form of :func:`eval_expr` for hot loops (numeric ODE right-hand sides)."""
    if isinstance(node, Const):
        v = node.value
        return lambda env: v
    if isinstance(node, Sym):
        name = node.name
        return lambda env: env[name]
    if isinstance(node, Neg):
        f = compile_expr(node.arg)
        return lambda env: -f(env)
    if isinstance(node, Pow):
        f, k = compile_expr(node.base), node.exp
        return lambda env: f(env) ** k
    f, g = compile_expr(node.left), compile_expr(node.right)
    op = node.op
    if op == "+":
        return lambda env: f(env) + g(env)
    if op == "-":
        return lambda env: f(env) - g(env)
    if op == "*":
        return lambda env: f(env) * g(env)
    return lambda env: _divide(f(env), g(env))


def float_expr(node: Expr) -> Callable[[Mapping[str, float]], float]:
    """Like :func:`compile_expr` but with constants converted to float once."""
    if isinstance(node, Const):
        v = float(node.value)
        return lambda env: v
    if isinstance(node, Sym):
        name = node.name
        return lambda env: env[name]
    if isinstance(node, Neg):
        f = float_expr(node.arg)
        return lambda env: -f(env)
    if isinstance(node, Pow):
        f, k = float_expr(node.base), node.exp
        return lambda env: f(env) ** k
    f, g = float_expr(node.left), float_expr(node.right)
    return {
        "+": lambda env: f(env) + g(env),
        "-": lambda env: f(env) - g(env),
        "*": lambda env: f(env) * g(env),
        "/": lambda env: f(env) / g(env),
    }[node.op]


# ---------------------------------------------------------------------------
# symbolic helpers
# ---------------------------------------------------------------------------

ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def _add(a, b):
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    return BinOp("+", a, b)


def _sub(a, b):
    if b == ZERO:
        return a
    if a == ZERO:
        return Neg(b)
    return BinOp("-", a, b)


def _mul(a, b):
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    return BinOp("*", a, b)


def diff(node: Expr, var: str) -> Expr:
    """Symbolic derivative with light zero/one folding (no further simplification)."""
    if isinstance(node, Const):
        return ZERO
    if isinstance(node, Sym):
        return ONE if node.name == var else ZERO
    if isinstance(node, Neg):
        d = diff(node.arg, var)
        return ZERO if d == ZERO else Neg(d)
    if isinstance(node, Pow):
        if node.exp == 0:
            return ZERO
        d = diff(node.base, var)
        if d == ZERO:
            return ZERO
        lower = node.base if node.exp == 2 else Pow(node.base, node.exp - 1)
        if node.exp == 1:
            return d
        return _mul(_mul(Const(Fraction(node.exp)), lower), d)
    da, db = diff(node.left, var), diff(node.right, var)
    if node.op == "+":
        return _add(da, db)
    if node.op == "-":
        return _sub(da, db)
    if node.op == "*":
        return _add(_mul(da, node.right), _mul(node.left, db))
    # quotient rule
    num = _sub(_mul(da, node.right), _mul(node.left, db))
    if num == ZERO:
        return ZERO
    return BinOp("/", num, Pow(node.right, 2))


def substitute(node: Expr, mapping: Mapping[str, Expr]) -> Expr:
    if isinstance(node, Sym):
        return mapping.get(node.name, node)
    if isinstance(node, Const):
        return node
    if isinstance(node, Neg):
        return Neg(substitute(node.arg, mapping))
    if isinstance(node, Pow):
        return Pow(substitute(node.base, mapping), node.exp)
    return BinOp(node.op, substitute(node.left, mapping), substitute(node.right, mapping))
