"""Text syntax for operator expressions.

EBNF (whitespace separates tokens)::

    expr    = [ "+" | "-" ] term { ( "+" | "-" ) term } ;
    term    = factor { "*" factor } ;
    factor  = number | name | dname | "(" expr ")"
            | "d" [ digits ] "(" expr ")"
            | ":" factor { factor } ":"
            | ":(" factor { factor } "):" ;
    number  = digits [ "/" digits ] ;
    dname   = "d" [ digits ] name ;       (* d2c is the second derivative of c *)

``:A B C:`` is the right-nested normal-ordered product ``:A :B C::``.
``*`` between a number and an operator scales; between two operators it is
also the normal-ordered product.  Names resolve to generators first, then to
the algebra's named expressions (``T`` for the Virasoro element, ``J`` for a
BRST current when present).
"""
from __future__ import annotations

import re
from fractions import Fraction

from .core import Poly, format_rational

__all__ = ["parse_expr", "format_expr", "ParseError"]


class ParseError(ValueError):
    def __init__(self, msg, pos):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(:\()|(\):)|(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z0-9_']*)|([:()+\-*]))")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", pos)
        start = m.start(m.lastindex)
        kind = ("open", "close", "num", "name", "op")[m.lastindex - 1]
        out.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, algebra, text):
        self.alg = algebra
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind, value=None):
        t = self.take()
        if t[0] != kind or (value is not None and t[1] != value):
            raise ParseError(f"expected {value or kind}, got {t[1] or 'end of input'!r}", t[2])
        return t

    def parse(self):
        e = self.expr()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected {t[1]!r}", t[2])
        return _as_expr(self.alg, e)

    def expr(self):
        sign = 1
        t = self.peek()
        if t[0] == "op" and t[1] in "+-":
            self.take()
            sign = -1 if t[1] == "-" else 1
        acc = _scale(self.term(), sign)
        while True:
            t = self.peek()
            if t[0] == "op" and t[1] in "+-":
                self.take()
                rhs = self.term()
                acc = _add(self.alg, acc, _scale(rhs, -1 if t[1] == "-" else 1))
            else:
                return acc

    def term(self):
        acc = self.factor()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            acc = _mul(self.alg, acc, self.factor())
        return acc

    def _starts_factor(self, t):
        return t[0] in ("num", "name", "open") or (t[0] == "op" and t[1] in "(:")

    def factor(self):
        t = self.take()
        kind, val, pos = t
        if kind == "num":
            return Fraction(val)
        if kind == "open":
            return self._wick(pos, closer="close")
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect("op", ")")
            return e
        if kind == "op" and val == ":":
            return self._wick(pos, closer=":")
        if kind == "name":
            return self._name(val, pos)
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)

    def _wick(self, pos, closer):
        items = []
        while True:
            t = self.peek()
            if closer == ":" and t[:2] == ("op", ":") and items:
                self.take()
                break
            if closer == "close" and t[0] == "close":
                self.take()
                break
            if t[0] == "end":
                raise ParseError("unterminated normal-ordered product", pos)
            items.append(self.factor())
        return reduce_wick(self.alg, items)

    def _name(self, val, pos):
        alg = self.alg
        if val in alg.index:
            return alg.gen(val)
        if val in alg.named:
            return alg.named[val]
        m = re.fullmatch(r"d(\d*)(.*)", val)
        if m:
            k = int(m.group(1) or 1)
            rest = m.group(2)
            if rest == "" and self.peek()[:2] == ("op", "("):
                self.take()
                e = _as_expr(alg, self.expr())
                self.expect("op", ")")
                return e.derivative(k)
            if rest in alg.index:
                return alg.gen(rest, k)
            if rest in alg.named:
                return alg.named[rest].derivative(k)
        raise ParseError(f"unknown name {val!r}", pos)


def _as_expr(alg, e):
    if isinstance(e, (Fraction, int)):
        return alg.scalar(Fraction(e))
    return e


def _scale(e, s):
    return e * s


def _add(alg, a, b):
    return _as_expr(alg, a) + _as_expr(alg, b)


def _mul(alg, a, b):
    if isinstance(a, Fraction) or isinstance(b, Fraction):
        return a * b
    return a.circle(b, -1)


def reduce_wick(alg, items):
    scal = Fraction(1)
    ops = []
    for it in items:
        if isinstance(it, Fraction):
            scal *= it
        else:
            ops.append(it)
    if not ops:
        return scal
    return alg.wick(*ops) * scal


def parse_expr(algebra, text: str):
    """Parse ``text`` into an :class:`OperatorExpr` of ``algebra``."""
    return _Parser(algebra, text).parse()


def _format_factor(alg, f):
    g, d = f
    name = alg.generators[g].name
    if d == 0:
        return name
    if d == 1:
        return f"d{name}"
    return f"d{d}{name}"


def format_monomial(alg, m) -> str:
    if not m:
        return "1"
    if len(m) == 1:
        return _format_factor(alg, m[0])
    return ":" + " ".join(_format_factor(alg, f) for f in m) + ":"


def _format_coeff(c):
    if isinstance(c, Poly):
        if c.is_constant():
            return format_rational(c.constant()), c.constant() < 0
        return f"({c})", False
    return format_rational(c), c < 0


def format_expr(e) -> str:
    alg = e.algebra
    if not e.terms:
        return "0"
    parts = []
    for m in sorted(e.terms, key=alg.sort_key, reverse=True):
        c = e.terms[m]
        cs, neg = _format_coeff(c)
        mono = format_monomial(alg, m)
        if neg:
            cs = cs[1:]
        if mono == "1":
            body = cs
        elif cs == "1":
            body = mono
        else:
            body = f"{cs}*{mono}"
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append(("- " if neg else "+ ") + body)
    return " ".join(parts)
