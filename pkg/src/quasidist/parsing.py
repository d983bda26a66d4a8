"""Small expression language for operators, symbols, and Hamiltonians.

The grammar is deliberately tiny.  Terms are products written by
juxtaposition ("0.5 q^2 p") or with an explicit '*'; '+' and '-' join terms;
'^' (or '**') raises to a non-negative integer power; parentheses group.
Recognized names are q, p, hbar, and the imaginary unit i (j also accepted).

The same parser feeds two targets.  ``parse_operator`` multiplies factors
with the noncommutative product, so "q p" and "p q" differ by i hbar as they
should.  ``parse_symbol`` builds a commuting phase-space polynomial.  Any
syntax problem raises :class:`ParseError` carrying the offending position.
"""
from __future__ import annotations

import re

from .coeffs import HbarPoly
from .errors import ParseError
from .operators import OperatorExpr, PhaseSpaceSymbol

_MAX_EXPONENT = 64

_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*^()])"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r}", position=pos)
        if match.lastgroup == "number":
            tokens.append(("number", match.group(), pos))
        elif match.lastgroup == "name":
            tokens.append(("name", match.group(), pos))
        elif match.lastgroup == "op":
            op = "^" if match.group() == "**" else match.group()
            tokens.append((op, match.group(), pos))
        pos = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent over the token list, building through ``algebra``.

    The algebra object supplies constant(value), variable(name, position),
    and the value type's own +, -, *, ** operators do the rest.
    """

    def __init__(self, text, algebra):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0
        self.algebra = algebra

    def peek(self):
        return self.tokens[self.index]

    def advance(self):
        tok = self.tokens[self.index]
        self.index += 1
        return tok

    def expect(self, kind):
        tok = self.advance()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1]!r}", position=tok[2])
        return tok

    def parse(self):
        if self.peek()[0] == "end":
            raise ParseError("empty expression", position=0)
        value = self.parse_expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected trailing {tok[1]!r}", position=tok[2])
        return value

    def parse_expr(self):
        sign = 1.0
        if self.peek()[0] in ("+", "-"):
            sign = -1.0 if self.advance()[0] == "-" else 1.0
        value = self.parse_term()
        if sign < 0:
            value = self.algebra.constant(-1.0) * value
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            term = self.parse_term()
            value = value + term if op == "+" else value - term
        return value

    def parse_term(self):
        value = self.parse_factor()
        while True:
            kind = self.peek()[0]
            if kind == "*":
                self.advance()
                value = value * self.parse_factor()
            elif kind in ("number", "name", "("):
                value = value * self.parse_factor()
            else:
                return value

    def parse_factor(self):
        base = self.parse_atom()
        if self.peek()[0] == "^":
            self.advance()
            tok = self.expect("number")
            try:
                exponent = int(tok[1])
            except ValueError:
                raise ParseError("exponent must be a plain integer", position=tok[2])
            if exponent < 0 or exponent > _MAX_EXPONENT:
                raise ParseError(
                    f"exponent must lie in [0, {_MAX_EXPONENT}]", position=tok[2])
            return base ** exponent
        return base

    def parse_atom(self):
        tok = self.advance()
        kind, text, pos = tok
        if kind == "number":
            return self.algebra.constant(float(text))
        if kind == "name":
            return self.algebra.variable(text, pos)
        if kind == "(":
            value = self.parse_expr()
            self.expect(")")
            return value
        raise ParseError(f"expected a value, found {text!r}", position=pos)


class _OperatorAlgebra:
    def __init__(self, hbar):
        self.hbar = hbar

    def constant(self, value):
        return OperatorExpr.monomial(value, 0, 0, hbar=self.hbar)

    def variable(self, name, pos):
        if name == "q":
            return OperatorExpr.position(hbar=self.hbar)
        if name == "p":
            return OperatorExpr.momentum(hbar=self.hbar)
        if name == "hbar":
            return OperatorExpr.monomial(HbarPoly.scalar(1.0, grade=1), 0, 0,
                                         hbar=self.hbar)
        if name in ("i", "j"):
            return OperatorExpr.monomial(1j, 0, 0, hbar=self.hbar)
        raise ParseError(f"unknown name {name!r}", position=pos)


class _SymbolAlgebra:
    def __init__(self, hbar):
        self.hbar = hbar

    def constant(self, value):
        return PhaseSpaceSymbol.monomial(value, 0, 0, hbar=self.hbar)

    def variable(self, name, pos):
        if name == "q":
            return PhaseSpaceSymbol.monomial(1.0, 1, 0, hbar=self.hbar)
        if name == "p":
            return PhaseSpaceSymbol.monomial(1.0, 0, 1, hbar=self.hbar)
        if name == "hbar":
            return PhaseSpaceSymbol.monomial(HbarPoly.scalar(1.0, grade=1), 0, 0,
                                             hbar=self.hbar)
        if name in ("i", "j"):
            return PhaseSpaceSymbol.monomial(1j, 0, 0, hbar=self.hbar)
        raise ParseError(f"unknown name {name!r}", position=pos)


def parse_operator(text: str, hbar: float = 1.0) -> OperatorExpr:
    """Parse operator text; juxtaposed factors multiply noncommutatively."""
    return _Parser(text, _OperatorAlgebra(hbar)).parse()


def parse_symbol(text: str, hbar: float = 1.0) -> PhaseSpaceSymbol:
    """Parse commuting phase-space polynomial text."""
    return _Parser(text, _SymbolAlgebra(hbar)).parse()
