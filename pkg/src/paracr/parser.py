"""Pratt parser for the ASCII expression grammar.

Grammar summary::

    expr    := integers, identifiers, + - * / ^, unary minus, parentheses
    call    := name '(' expr {',' expr} ')'        opaque function
             | name "'"... '(' expr ')'            formal derivative, one prime per order
             | 'D' '[' name ',' k {',' k} ']' '(' args ')'
    partial := G_pp                                 only for names declared in ``functions``

Identifiers that are not declared functions are coordinates.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Mapping, Sequence

from .expr import Const, Expr, Fn, Var, add, div, mul, neg, power


class ParseError(ValueError):
    """Raised on malformed input; ``offset`` is the byte offset of the offending token."""

    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at byte {offset}")


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op>[-+*/^(),\[\]'])
    """,
    re.VERBOSE,
)

_INFIX = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_PREFIX_MINUS = 25


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unknown token {text[pos]!r}", len(text[:pos].encode()), text)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), len(text[:pos].encode())))
        pos = m.end()
    out.append(("end", "", len(text.encode())))
    return out


class _Parser:
    def __init__(self, text: str, functions: Mapping[str, Sequence[str]]):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.functions = {k: tuple(v) for k, v in functions.items()}

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, off = self.advance()
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", off, self.text)

    def error(self, message, tok):
        raise ParseError(message, tok[2], self.text)

    def parse(self) -> Expr:
        e = self.expression(0)
        tok = self.peek()
        if tok[0] != "end":
            self.error(f"unexpected {tok[1]!r}", tok)
        return e

    def expression(self, rbp: int) -> Expr:
        left = self.prefix()
        while True:
            kind, text, off = self.peek()
            if kind != "op" or text not in _INFIX or _INFIX[text] <= rbp:
                break
            self.advance()
            if text == "^":
                rhs = self.expression(_INFIX["^"] - 1)
                if not (isinstance(rhs, Const) and rhs.value.denominator == 1):
                    raise ParseError("exponent must be an integer constant", off, self.text)
                left = power(left, int(rhs.value))
            else:
                rhs = self.expression(_INFIX[text])
                if text == "+":
                    left = add(left, rhs)
                elif text == "-":
                    left = add(left, neg(rhs))
                elif text == "*":
                    left = mul(left, rhs)
                else:
                    try:
                        left = div(left, rhs)
                    except ZeroDivisionError:
                        raise ParseError("division by literal zero", off, self.text) from None
        return left

    def prefix(self) -> Expr:
        tok = self.advance()
        kind, text, off = tok
        if kind == "num":
            return Const(int(text))
        if kind == "op" and text == "-":
            return neg(self.expression(_PREFIX_MINUS))
        if kind == "op" and text == "+":
            return self.expression(_PREFIX_MINUS)
        if kind == "op" and text == "(":
            e = self.expression(0)
            self.expect(")")
            return e
        if kind == "ident":
            return self.identifier(tok)
        if kind == "end":
            self.error("unexpected end of input", tok)
        self.error(f"unexpected {text!r}", tok)

    def arguments(self) -> list[Expr]:
        self.expect("(")
        args = [self.expression(0)]
        while self.peek()[1] == ",":
            self.advance()
            args.append(self.expression(0))
        self.expect(")")
        return args

    def identifier(self, tok) -> Expr:
        _, name, off = tok
        nxt = self.peek()
        if name == "D" and nxt[1] == "[":
            self.advance()
            fname = self.advance()
            if fname[0] != "ident":
                self.error("expected function name", fname)
            orders = []
            while self.peek()[1] == ",":
                self.advance()
                k = self.advance()
                if k[0] != "num":
                    self.error("expected derivative order", k)
                orders.append(int(k[1]))
            self.expect("]")
            args = self.arguments()
            if len(orders) != len(args):
                self.error("one derivative order per argument required", fname)
            return Fn(fname[1], args, orders)
        if nxt[1] == "'":
            order = 0
            while self.peek()[1] == "'":
                self.advance()
                order += 1
            args = self.arguments()
            if len(args) != 1:
                self.error("prime notation needs exactly one argument", tok)
            return Fn(name, args, (order,))
        if nxt[1] == "(":
            args = self.arguments()
            return Fn(name, args)
        if name in self.functions:
            coords = self.functions[name]
            return Fn(name, [Var(c) for c in coords])
        base, sep, suffix = name.partition("_")
        if sep and base in self.functions and suffix:
            coords = self.functions[base]
            orders = [0] * len(coords)
            for ch in suffix:
                if ch not in coords:
                    self.error(f"{ch!r} is not an argument of {base}", tok)
                orders[coords.index(ch)] += 1
            return Fn(base, [Var(c) for c in coords], orders)
        return Var(name)


def parse(text: str, functions: Mapping[str, Sequence[str]] | None = None) -> Expr:
    """Parse ``text``; ``functions`` declares opaque names with their coordinate arguments."""
    return _Parser(text, functions or {}).parse()


def parse_rational(text: str) -> Fraction:
    e = parse(text)
    if not isinstance(e, Const):
        raise ParseError("expected a rational constant", 0, text)
    return e.value
