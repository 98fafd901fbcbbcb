"""Arithmetic expression AST, recursive-descent parser, and evaluator.

Grammar (highest precedence last):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          # right-associative, signed exponents
    atom   := NUMBER | '(' expr ')'

Numbers are integer or decimal literals; both become exact rationals.
The unicode glyphs ×, ÷, and − are accepted as aliases for *, /, and -.
There are no variables and no symbolic simplification: the grammar covers
numeric recomputation of in-step arithmetic, nothing more.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

# Integer exponents beyond this are treated as overflow rather than computed.
MAX_INT_EXPONENT = 4096

Value = Union[Fraction, float]


class EvalError(ArithmeticError):
    """Base class for evaluation failures."""


class DivisionByZero(EvalError):
    pass


class Overflow(EvalError):
    pass


class ExprSyntaxError(ValueError):
    """Raised when text does not parse under the expression grammar."""


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Group:
    inner: "Expr"


Expr = Union[Num, Neg, BinOp, Group]


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "op", "lparen", "rparen", "other"
    text: str
    start: int
    end: int


_OP_ALIASES = {"×": "*", "÷": "/", "−": "-"}
_OPS = set("+-*/^")


def lex(text: str) -> list[Token]:
    """Tokenize ``text`` leniently.

    Unrecognized characters become ``other`` tokens (one per contiguous
    run), which lets equation extraction find the parseable window around
    an '=' sign inside arbitrary prose. Spaces and tabs are skipped;
    newlines count as ``other`` so equations never span lines.
    """
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in " \t":
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                if text[j] == ".":
                    # A dot not followed by a digit is punctuation, not a decimal.
                    if j + 1 >= n or not text[j + 1].isdigit():
                        break
                    seen_dot = True
                j += 1
            tokens.append(Token("num", text[i:j], i, j))
            i = j
            continue
        op = _OP_ALIASES.get(ch, ch)
        if op in _OPS:
            tokens.append(Token("op", op, i, i + 1))
            i += 1
            continue
        if ch == "(":
            tokens.append(Token("lparen", ch, i, i + 1))
            i += 1
            continue
        if ch == ")":
            tokens.append(Token("rparen", ch, i, i + 1))
            i += 1
            continue
        j = i
        while j < n and not (
            text[j] in " \t()"
            or text[j].isdigit()
            or _OP_ALIASES.get(text[j], text[j]) in _OPS
        ):
            j += 1
        if j == i:
            j = i + 1
        tokens.append(Token("other", text[i:j], i, j))
        i = j
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ExprSyntaxError("unexpected end of expression")
        self.pos += 1
        return tok

    def expr(self) -> Expr:
        node = self.term()
        while True:
            tok = self.peek()
            if tok is not None and tok.kind == "op" and tok.text in "+-":
                self.take()
                node = BinOp(tok.text, node, self.term())
            else:
                return node

    def term(self) -> Expr:
        node = self.unary()
        while True:
            tok = self.peek()
            if tok is not None and tok.kind == "op" and tok.text in "*/":
                self.take()
                node = BinOp(tok.text, node, self.unary())
            else:
                return node

    def unary(self) -> Expr:
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.text == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.text == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.take()
        if tok.kind == "num":
            return Num(Fraction(tok.text))
        if tok.kind == "lparen":
            inner = self.expr()
            closer = self.take()
            if closer.kind != "rparen":
                raise ExprSyntaxError(f"expected ')', found {closer.text!r}")
            return Group(inner)
        raise ExprSyntaxError(f"unexpected token {tok.text!r}")


def parse_tokens(tokens: list[Token]) -> Expr:
    """Parse a token list that must be consumed entirely."""
    parser = _Parser(tokens)
    node = parser.expr()
    if parser.pos != len(tokens):
        leftover = tokens[parser.pos]
        raise ExprSyntaxError(f"trailing input at {leftover.text!r}")
    return node


def parse_expr(text: str) -> Expr:
    """Parse ``text`` as a complete expression."""
    tokens = lex(text)
    if not tokens:
        raise ExprSyntaxError("empty expression")
    if any(t.kind == "other" for t in tokens):
        bad = next(t for t in tokens if t.kind == "other")
        raise ExprSyntaxError(f"unrecognized input {bad.text!r}")
    return parse_tokens(tokens)


def eval_expr(expr: Expr) -> Value:
    """Evaluate an expression: exact rationals where possible, else float.

    Integer-exponent powers are computed exactly over rationals (capped at
    MAX_INT_EXPONENT); fractional exponents fall back to floating point.
    """
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, Group):
        return eval_expr(expr.inner)
    if isinstance(expr, Neg):
        return -eval_expr(expr.operand)
    if isinstance(expr, BinOp):
        left = eval_expr(expr.left)
        right = eval_expr(expr.right)
        return _apply(expr.op, left, right)
    raise TypeError(f"not an expression node: {expr!r}")


def _apply(op: str, left: Value, right: Value) -> Value:
    if op == "^":
        return _power(left, right)
    if isinstance(left, float) or isinstance(right, float):
        left, right = float(left), float(right)
    if op == "+":
        result: Value = left + right
    elif op == "-":
        result = left - right
    elif op == "*":
        result = left * right
    elif op == "/":
        if right == 0:
            raise DivisionByZero("division by zero")
        result = left / right
    else:
        raise TypeError(f"unknown operator {op!r}")
    return _check_float(result)


def _power(base: Value, exponent: Value) -> Value:
    if isinstance(exponent, Fraction) and exponent.denominator == 1 and isinstance(base, Fraction):
        exp = int(exponent)
        if abs(exp) > MAX_INT_EXPONENT:
            raise Overflow(f"integer exponent {exp} exceeds cap {MAX_INT_EXPONENT}")
        if base == 0 and exp < 0:
            raise DivisionByZero("zero raised to a negative power")
        return base ** exp
    fbase, fexp = float(base), float(exponent)
    if fbase == 0.0 and fexp < 0:
        raise DivisionByZero("zero raised to a negative power")
    try:
        result = math.pow(fbase, fexp)
    except (ValueError, OverflowError) as exc:
        if isinstance(exc, OverflowError):
            raise Overflow(str(exc)) from exc
        raise EvalError(f"power not evaluable over the reals: {fbase} ^ {fexp}") from exc
    return _check_float(result)


def _check_float(value: Value) -> Value:
    if isinstance(value, float):
        if math.isinf(value):
            raise Overflow("result magnitude exceeds representable range")
        if math.isnan(value):
            raise EvalError("result is not a number")
    return value
