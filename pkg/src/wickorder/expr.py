"""Text expressions for operators: tokenizer, parser, printer and evaluator.

Grammar::

    expr    := ["-"] term (("+" | "-") term)*
    term    := factor ("*" factor)*
    factor  := primary ("^" uint)?
    primary := scalar | gen | "(" expr ")" | ORD "{" expr "}"
    ORD     := N | A | QP | PQ | W | S "[" "s" "=" rational "]"

Scalars are rationals (``3``, ``1/2``, ``0.25``), ``i``, ``sqrt2`` and
named indeterminates; generators are ``q``, ``p``, ``c`` and ``cd`` with an
optional ``[k]`` mode index.

An ordering node reads its body as a formal sum of words (no commutation
rules applied), rearranges every word and returns the normal form.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Union

from .algebra import (
    LADDER,
    QP,
    OperatorPolynomial,
    _convert_word,
    mode_of,
    normal_form,
    species_of,
)
from .algebra import C as _C
from .algebra import CD as _CD
from .algebra import P as _P
from .algebra import Q as _Q
from .errors import DimensionError, ParseError
from .scalar import I, ONE, SQRT2, Scalar, rational

GENERATORS = ("q", "p", "c", "cd")
ORDERINGS = ("N", "A", "QP", "PQ", "W", "S")
_RESERVED = set(GENERATORS) | {"i", "sqrt2"}

# -- AST -------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class ImagUnit:
    pass


@dataclass(frozen=True)
class Sqrt2:
    pass


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Gen:
    name: str
    index: int | None = None


@dataclass(frozen=True)
class Sum:
    terms: tuple  # of (sign, node) with sign in {+1, -1}


@dataclass(frozen=True)
class Product:
    factors: tuple


@dataclass(frozen=True)
class Power:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Ordered:
    name: str
    body: "Node"
    s: Fraction | None = None


Node = Union[Num, ImagUnit, Sqrt2, Sym, Gen, Sum, Product, Power, Ordered]

# -- tokenizer -------------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>\d+(?:/\d+|\.\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*^(){}\[\]=])"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    out = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            out.append(Token(kind, chunk, line, col))
        for ch in chunk:
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        pos = m.end()
    out.append(Token("end", "", line, col))
    return out


# -- parser ----------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, n_modes: int):
        self.tokens = tokenize(text)
        self.pos = 0
        self.n_modes = n_modes

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        raise ParseError(message, tok.line, tok.column)

    def take(self, text: str | None = None, kind: str | None = None) -> Token:
        tok = self.tok
        if (text is not None and tok.text != text) or (kind is not None and tok.kind != kind) \
                or (text is None and kind is None):
            want = repr(text) if text is not None else kind
            found = repr(tok.text) if tok.kind != "end" else "end of input"
            self.fail(f"expected {want}, found {found}")
        self.pos += 1
        return tok

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            self.fail(f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> Node:
        terms = []
        sign = 1
        if self.at("-"):
            self.take("-")
            sign = -1
        elif self.at("+"):
            self.fail("unexpected '+'")
        terms.append((sign, self.term()))
        while self.at("+") or self.at("-"):
            sign = 1 if self.take(kind="op").text == "+" else -1
            terms.append((sign, self.term()))
        if len(terms) == 1 and terms[0][0] == 1:
            return terms[0][1]
        return Sum(tuple(terms))

    def term(self) -> Node:
        factors = [self.factor()]
        while self.at("*"):
            self.take("*")
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def factor(self) -> Node:
        base = self.primary()
        if self.at("^"):
            self.take("^")
            tok = self.tok
            if tok.kind != "num" or not tok.text.isdigit():
                self.fail("exponent must be a non-negative integer")
            self.pos += 1
            return Power(base, int(tok.text))
        return base

    def primary(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.pos += 1
            return Num(Fraction(tok.text))
        if self.at("("):
            self.take("(")
            node = self.expr()
            self.take(")")
            return node
        if tok.kind == "name":
            self.pos += 1
            nxt = self.tok
            if nxt.kind == "op" and nxt.text in "{[" and tok.text not in GENERATORS:
                return self.ordered(tok)
            if tok.text in GENERATORS:
                return self.generator(tok)
            if tok.text == "i":
                return ImagUnit()
            if tok.text == "sqrt2":
                return Sqrt2()
            if tok.text in ORDERINGS:
                self.fail(f"ordering {tok.text} needs a body in braces", nxt)
            return Sym(tok.text)
        found = repr(tok.text) if tok.kind != "end" else "end of input"
        self.fail(f"expected a scalar, generator, '(' or ordering, found {found}")

    def generator(self, tok: Token) -> Gen:
        index = None
        if self.at("["):
            self.take("[")
            num = self.tok
            if num.kind != "num" or not num.text.isdigit():
                self.fail("mode index must be a positive integer")
            self.pos += 1
            index = int(num.text)
            self.take("]")
            if not 1 <= index <= self.n_modes:
                raise ParseError(f"mode index {index} outside 1..{self.n_modes}", num.line, num.column)
        elif self.n_modes > 1:
            self.fail(f"generator {tok.text} needs a mode index with {self.n_modes} modes", tok)
        return Gen(tok.text, index)

    def ordered(self, tok: Token) -> Ordered:
        name = tok.text
        if name not in ORDERINGS:
            self.fail(f"unknown ordering {name!r}; expected one of {', '.join(ORDERINGS)}", tok)
        s = None
        if name == "S":
            self.take("[")
            key = self.take(kind="name")
            if key.text != "s":
                self.fail("expected 's='", key)
            self.take("=")
            sign = 1
            if self.at("-"):
                self.take("-")
                sign = -1
            num = self.take(kind="num")
            s = sign * Fraction(num.text)
            self.take("]")
        elif self.at("["):
            self.fail(f"ordering {name} takes no parameters")
        self.take("{")
        body = self.expr()
        self.take("}")
        return Ordered(name, body, s)


def parse(text: str, n_modes: int = 1) -> Node:
    """Parse ``text`` into an AST; raises :class:`ParseError` with a position."""
    if n_modes < 1:
        raise ValueError("need at least one mode")
    return _Parser(text, n_modes).parse()


# -- printer ---------------------------------------------------------------------

def _fraction_text(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def to_text(node: Node) -> str:
    """Print an AST so that ``parse(to_text(ast)) == ast``."""
    if isinstance(node, Num):
        return _fraction_text(node.value)
    if isinstance(node, ImagUnit):
        return "i"
    if isinstance(node, Sqrt2):
        return "sqrt2"
    if isinstance(node, Sym):
        return node.name
    if isinstance(node, Gen):
        return node.name if node.index is None else f"{node.name}[{node.index}]"
    if isinstance(node, Sum):
        parts = []
        for k, (sign, t) in enumerate(node.terms):
            body = _wrap(t, (Sum,))
            if k == 0:
                parts.append(("-" if sign < 0 else "") + body)
            else:
                parts.append(("- " if sign < 0 else "+ ") + body)
        return " ".join(parts)
    if isinstance(node, Product):
        return "*".join(_wrap(f, (Sum, Product)) for f in node.factors)
    if isinstance(node, Power):
        return f"{_wrap(node.base, (Sum, Product, Power))}^{node.exponent}"
    if isinstance(node, Ordered):
        head = node.name if node.s is None else f"S[s={_fraction_text(node.s)}]"
        return f"{head}{{{to_text(node.body)}}}"
    raise TypeError(f"not an expression node: {node!r}")


def _wrap(node: Node, kinds: tuple) -> str:
    text = to_text(node)
    return f"({text})" if isinstance(node, kinds) else text


# -- evaluation ------------------------------------------------------------------

_MONOMIAL_ORDERS = {
    # basis, ranking of species (higher goes left)
    "N": (LADDER, {_CD: 1, _C: 0}),
    "A": (LADDER, {_C: 1, _CD: 0}),
    "QP": (QP, {_Q: 1, _P: 0}),
    "PQ": (QP, {_P: 1, _Q: 0}),
}


def evaluate(node: Node, n_modes: int = 1) -> OperatorPolynomial:
    """Value of an AST as an operator polynomial.

    Outside ordering nodes products are kept as written (unreduced words);
    every ordering node returns a normal form.
    """
    if isinstance(node, Num):
        return OperatorPolynomial.scalar(Scalar(node.value))
    if isinstance(node, ImagUnit):
        return OperatorPolynomial.scalar(I)
    if isinstance(node, Sqrt2):
        return OperatorPolynomial.scalar(SQRT2)
    if isinstance(node, Sym):
        return OperatorPolynomial.scalar(Scalar.var(node.name))
    if isinstance(node, Gen):
        mode = node.index or 1
        if mode > n_modes:
            raise DimensionError(f"mode {mode} outside 1..{n_modes}")
        return OperatorPolynomial.generator(node.name, mode)
    if isinstance(node, Sum):
        out = OperatorPolynomial()
        for sign, t in node.terms:
            v = evaluate(t, n_modes)
            out = out + v if sign > 0 else out - v
        return out
    if isinstance(node, Product):
        out = OperatorPolynomial.identity()
        for f in node.factors:
            out = out * evaluate(f, n_modes)
        return out
    if isinstance(node, Power):
        return evaluate(node.base, n_modes) ** node.exponent
    if isinstance(node, Ordered):
        return apply_ordering(node.name, evaluate(node.body, n_modes), node.s)
    raise TypeError(f"not an expression node: {node!r}")


def apply_ordering(name: str, body: OperatorPolynomial, s=None) -> OperatorPolynomial:
    """Rearrange every word of ``body`` by the named ordering and normal order."""
    if name in _MONOMIAL_ORDERS:
        basis, rank = _MONOMIAL_ORDERS[name]
        out: dict = {}
        for word, coeff in body.items():
            for w, c in _convert_word(word, basis):
                arranged = tuple(sorted(w, key=lambda g: (-rank[species_of(g)], mode_of(g))))
                _add(out, arranged, c * coeff)
        return normal_form(OperatorPolynomial(out), basis)
    if name == "W":
        out = {}
        for word, coeff in body.items():
            arrangements = sorted(set(permutations(word)))
            share = coeff / Scalar(len(arrangements))
            for w in arrangements:
                _add(out, w, share)
        return normal_form(OperatorPolynomial(out))
    if name == "S":
        if s is None:
            raise ValueError("s-ordering needs a value of s")
        return _s_order(body, Scalar.coerce(s))
    raise ValueError(f"unknown ordering {name!r}")


def _add(acc: dict, w, c) -> None:
    acc[w] = acc[w] + c if w in acc else c


def _s_order(body: OperatorPolynomial, s: Scalar) -> OperatorPolynomial:
    from .sordering import s_ordered_value

    out = OperatorPolynomial()
    for word, coeff in body.items():
        for w, c in _convert_word(word, LADDER):
            counts: dict[int, list[int]] = {}
            for g in w:
                slot = counts.setdefault(mode_of(g), [0, 0])
                slot[0 if species_of(g) == _C else 1] += 1
            term = OperatorPolynomial.scalar(c * coeff)
            for mode, (n, m) in sorted(counts.items()):
                term = term * s_ordered_value(n, m, s, mode + 1)
            out = out + term
    return normal_form(out, LADDER)


def evaluate_text(text: str, n_modes: int = 1, basis: str | None = None) -> OperatorPolynomial:
    """Parse, evaluate and normal order."""
    return normal_form(evaluate(parse(text, n_modes), n_modes), basis)
