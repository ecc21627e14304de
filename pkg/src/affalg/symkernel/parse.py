"""Recursive-descent parser for the expression grammar.

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := ('-' | '+') unary | factor
    factor   := base ('^' exponent)?
    exponent := ['-'] number | '(' ['-'] number ['/' number] ')'
    base     := number | ident | ident '(' expr ')' | '(' expr ')'

Fractional exponents must be parenthesised (``x^(1/2)``) so that ``x^2/2``
keeps its usual meaning.  Decimal literals become exact rationals.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Mapping

from ..errors import ParseError, UnknownIdentifier
from .nodes import FUNCTIONS, Add, Const, Div, Func, Mul, Pow, Var, as_number

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


class _Parser:
    def __init__(self, text, names, constants):
        self.text = text
        self.names = names
        self.constants = constants
        self.tokens = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                bad = len(text) - len(text[pos:].lstrip())
                self._fail(f"unexpected character {text[bad]!r}", bad)
            kind = m.lastgroup
            start = m.start(kind)
            self.tokens.append((kind, m.group(kind), start))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def _offset(self, char_pos):
        return len(self.text[:char_pos].encode("utf-8"))

    def _fail(self, msg, char_pos):
        raise ParseError(msg, self._offset(char_pos), self.text)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, v, pos = self.take()
        if v != value:
            self._fail(f"expected {value!r} but found {v or 'end of input'!r}", pos)

    def parse(self):
        e = self.expr()
        kind, v, pos = self.peek()
        if kind != "end":
            self._fail(f"unexpected token {v!r}", pos)
        return e

    def expr(self):
        terms = [self.term()]
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            _, op, _ = self.take()
            t = self.term()
            terms.append(t if op == "+" else Mul((Const(-1), t)))
        return terms[0] if len(terms) == 1 else Add(tuple(terms))

    def term(self):
        e = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in ("*", "/"):
            _, op, _ = self.take()
            rhs = self.unary()
            if op == "*":
                e = Mul((e, rhs))
            else:
                e = Div(e, rhs)
        return e

    def unary(self):
        kind, v, _ = self.peek()
        if kind == "op" and v in ("-", "+"):
            self.take()
            inner = self.unary()
            return Mul((Const(-1), inner)) if v == "-" else inner
        return self.factor()

    def factor(self):
        base = self.base()
        if self.peek()[1] == "^" and self.peek()[0] == "op":
            self.take()
            return Pow(base, self.exponent())
        return base

    def _signed_number(self):
        sign = 1
        if self.peek()[1] in ("-", "+") and self.peek()[0] == "op":
            sign = -1 if self.take()[1] == "-" else 1
        kind, v, pos = self.take()
        if kind != "num":
            self._fail("expected a rational exponent", pos)
        return sign * Fraction(v)

    def exponent(self):
        if self.peek()[1] == "(":
            self.take()
            p = self._signed_number()
            if self.peek()[1] == "/":
                self.take()
                kind, v, pos = self.take()
                if kind != "num" or Fraction(v) == 0:
                    self._fail("expected a non-zero denominator", pos)
                p = p / Fraction(v)
            self.expect(")")
            return p
        return self._signed_number()

    def base(self):
        kind, v, pos = self.take()
        if kind == "num":
            return Const(Fraction(v))
        if kind == "id":
            if self.peek()[1] == "(":
                if v not in FUNCTIONS:
                    raise UnknownIdentifier(v, self._offset(pos), self.text)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Func(v, arg)
            if v in FUNCTIONS:
                self._fail(f"function {v!r} needs an argument", pos)
            if v in self.constants:
                return Const(self.constants[v])
            if self.names is not None and v not in self.names:
                raise UnknownIdentifier(v, self._offset(pos), self.text)
            return Var(v)
        if v == "(":
            e = self.expr()
            self.expect(")")
            return e
        self._fail(f"unexpected {v or 'end of input'!r}", pos)


def parse(text: str, chart=None, constants: Mapping[str, object] | None = None):
    """Parse ``text`` into an expression tree.

    ``chart`` (a Chart or any container of names) restricts the allowed
    identifiers; ``constants`` maps extra identifiers to numeric values.
    """
    if not isinstance(text, str):
        raise ParseError(f"expression must be a string, got {type(text).__name__}")
    names = None if chart is None else set(chart)
    consts = {k: as_number(v) for k, v in (constants or {}).items()}
    return _Parser(text, names, consts).parse()
