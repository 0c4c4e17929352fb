"""Parser for the element expression grammar.

::

    expr    := term (("+" | "-") term)*
    term    := unary (["*"] unary)*          juxtaposition multiplies
    unary   := "-" unary | postfix
    postfix := atom "'"*                      ' is the adjoint
    atom    := RATIONAL | "i" | gen | "(" expr ")"
    gen     := "S[" path "]" | "S*[" path "]" | "p[" vertex "]" | "P[" path "]"
             | "S_" word | "S*_" word | "p_" word | "P_" word

A path is a dot-separated list of edge ids.  In the underscore shorthand the
word is taken as one edge id when it is one, otherwise each character is an
edge id, so ``S_12`` is ``S_1 S_2`` over O_2.  Rationals are scalar multiples
of the unit.  The canonical printed form of an element is a valid expression.
"""

from __future__ import annotations

import operator
import re
from fractions import Fraction

from .algebra import Element, normal_form
from .graph import DirectedGraph, GraphError
from .scalar import GaussianRational


class ExprError(ValueError):
    pass


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:/\d+)?)
  | (?P<gen>(?:S\*|S|p|P)(?:\[[^\]]*\]|_[A-Za-z0-9]+))
  | (?P<imag>i(?![A-Za-z0-9_]))
  | (?P<op>[-+*()'])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[tuple[str, str]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExprError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group()))
    return out


def _split_path(g: DirectedGraph, body: str, shorthand: bool) -> tuple[str, ...]:
    if shorthand:
        if body in g.src:
            return (body,)
        edges = tuple(body)
    else:
        edges = tuple(body.split(".")) if body else ()
    for e in edges:
        if e not in g.src:
            raise ExprError(f"unknown edge {e!r}")
    return edges


def _generator(g: DirectedGraph, tok: str) -> Element:
    if tok.startswith("S*"):
        head, rest = "S*", tok[2:]
    else:
        head, rest = tok[0], tok[1:]
    shorthand = rest.startswith("_")
    body = rest[1:] if shorthand else rest[1:-1]
    try:
        if head == "p":
            if body not in g.vertex_index:
                raise ExprError(f"unknown vertex {body!r}")
            return Element.vertex(g, body)
        path = _split_path(g, body, shorthand)
        if not path:
            raise ExprError(f"empty path in {tok!r}")
        if head == "S":
            return Element.s(g, path)
        if head == "S*":
            return Element.s_star(g, path)
        return Element.projection(g, path)
    except GraphError as exc:
        raise ExprError(str(exc)) from exc


class _Parser:
    def __init__(self, g: DirectedGraph, tokens):
        self.g = g
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self):
        t = self.peek()
        self.i += 1
        return t

    def expect(self, value):
        kind, v = self.take()
        if v != value:
            raise ExprError(f"expected {value!r}, got {v!r}")

    def parse(self):
        e = self.expr()
        if self.i != len(self.toks):
            raise ExprError(f"trailing input near {self.peek()[1]!r}")
        return e

    def expr(self):
        acc = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def _starts_atom(self):
        kind, v = self.peek()
        return kind in ("num", "gen", "imag") or v == "("

    def term(self):
        acc = self.unary()
        while True:
            if self.peek()[1] == "*":
                self.take()
                acc = _mul(acc, self.unary())
            elif self._starts_atom():
                acc = _mul(acc, self.unary())
            else:
                return acc

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return _neg(self.unary())
        return self.postfix()

    def postfix(self):
        a = self.atom()
        while self.peek()[1] == "'":
            self.take()
            a = a.conjugate() if isinstance(a, GaussianRational) else a.adjoint()
        return a

    def atom(self):
        kind, v = self.take()
        if kind == "num":
            return GaussianRational(Fraction(v))
        if kind == "imag":
            return GaussianRational(0, 1)
        if kind == "gen":
            return _generator(self.g, v)
        if v == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ExprError(f"unexpected token {v!r}")


# Scalars stay scalars until they meet an element, which keeps coefficients
# such as (1/2-3/4i) exact and cheap.
_mul = operator.mul
_neg = operator.neg


def parse_element(g: DirectedGraph, text: str, normalize: bool = True) -> Element:
    """Parse an expression into an element over ``g``."""
    if not text.strip():
        raise ExprError("empty expression")
    value = _Parser(g, tokenize(text)).parse()
    if isinstance(value, GaussianRational):
        value = Element.scalar(g, value)
    return normal_form(value) if normalize else value
