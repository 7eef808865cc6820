"""Parser for the polynomial and form string grammars.

Polynomials: rational literals (`3/2`), variable names, operators + - * ^
and parentheses; `x^-1` is permitted only for inverted variables (enforced
by the ring when the monomial is built).

Forms extend the grammar with `d(<var>)` atoms; `^` doubles as the wedge
between form factors and as an integer power otherwise.  Both grammars are
handled by one recursive-descent parser producing DiffForm values; the
polynomial entry point additionally demands form degree 0.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .forms import DiffForm
from .rings import LocalizedPoly, Ring


class ParseError(ValueError):
    """Input text does not conform to the grammar."""


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+(?:/\d+)?)"
    r"|(?P<dvar>d\(\s*[a-zA-Z][a-zA-Z0-9_]*\s*\))"
    r"|(?P<name>[a-zA-Z][a-zA-Z0-9_]*)"
    r"|(?P<op>[-+*^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ParseError("unexpected character at %r" % text[pos:])
            break
        if m.lastgroup == "number":
            tokens.append(("number", m.group("number")))
        elif m.lastgroup == "dvar":
            inner = m.group("dvar")[2:-1].strip()
            tokens.append(("dvar", inner))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name")))
        else:
            tokens.append(("op", m.group("op")))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, ring: Ring, text: str):
        self.ring = ring
        self.tokens = _tokenize(text)
        self.pos = 0
        self.text = text

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def advance(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, val = self.advance()
        if kind != "op" or val != op:
            raise ParseError("expected %r in %r" % (op, self.text))

    def parse(self) -> DiffForm:
        value = self.expression()
        if self.pos != len(self.tokens):
            raise ParseError("trailing input in %r" % self.text)
        return value

    def expression(self) -> DiffForm:
        value = self.term()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.advance()
                rhs = self.term()
                value = value + rhs if val == "+" else value - rhs
            else:
                return value

    def term(self) -> DiffForm:
        value = self.unary()
        while True:
            kind, val = self.peek()
            if kind == "op" and val == "*":
                self.advance()
                value = value.wedge(self.unary())
            else:
                return value

    def unary(self) -> DiffForm:
        kind, val = self.peek()
        if kind == "op" and val in "+-":
            self.advance()
            inner = self.unary()
            return -inner if val == "-" else inner
        return self.power()

    def power(self) -> DiffForm:
        base = self.factor()
        while True:
            kind, val = self.peek()
            if not (kind == "op" and val == "^"):
                return base
            self.advance()
            exponent = self._try_integer()
            if exponent is not None:
                base = self._int_power(base, exponent)
            else:
                base = base.wedge(self.factor())

    def _try_integer(self):
        kind, val = self.peek()
        if kind == "number" and "/" not in val:
            self.advance()
            return int(val)
        if kind == "op" and val == "-":
            nkind, nval = (
                self.tokens[self.pos + 1]
                if self.pos + 1 < len(self.tokens)
                else (None, None)
            )
            if nkind == "number" and "/" not in nval:
                self.advance()
                self.advance()
                return -int(nval)
        return None

    def _int_power(self, base: DiffForm, k: int) -> DiffForm:
        if base.degrees() not in (set(), {0}):
            raise ParseError("integer powers only apply to 0-forms")
        poly = base.coefficient(())
        return DiffForm.from_poly(poly**k)

    def factor(self) -> DiffForm:
        kind, val = self.advance()
        if kind == "number":
            if "/" in val:
                num, den = val.split("/")
                return DiffForm.from_poly(self.ring.constant(Fraction(int(num), int(den))))
            return DiffForm.from_poly(self.ring.constant(int(val)))
        if kind == "name":
            return DiffForm.from_poly(self.ring.var(val))
        if kind == "dvar":
            return DiffForm.d_var(self.ring, val)
        if kind == "op" and val == "(":
            inner = self.expression()
            self.expect_op(")")
            return inner
        raise ParseError("unexpected token %r in %r" % (val, self.text))


def parse_form(ring: Ring, text: str) -> DiffForm:
    return _Parser(ring, text).parse()


def parse_poly(ring: Ring, text: str) -> LocalizedPoly:
    form = parse_form(ring, text)
    if form.degrees() not in (set(), {0}):
        raise ParseError("expected a polynomial, got a form: %r" % text)
    return form.coefficient(())
