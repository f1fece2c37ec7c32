"""Noncommutative polynomials in canonical generators and their normal forms.

Generators are encoded as small integers ``4*mode + species`` with the
species ``q=0, p=1, cd=2, c=3`` (``cd`` is the creation operator).  Integer
order therefore *is* the canonical order: mode-major, ``q`` before ``p`` and
``c^dagger`` before ``c``.  A word is a tuple of generators, the empty word
being the identity.

Conventions (hbar = 1)::

    [q_k, p_l] = i delta_kl        c = (q + i p)/sqrt2,  c^dagger = (q - i p)/sqrt2
    [c_k, c^dagger_l] = delta_kl
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import DimensionError, UnknownIndeterminateError
from .scalar import (
    I,
    I_G,
    INV_SQRT2,
    ONE,
    ONE_G,
    ZERO,
    Gaussian,
    Scalar,
    ScalarLike,
)

Q, P, CD, C = 0, 1, 2, 3
SPECIES = {"q": Q, "p": P, "cd": CD, "c": C}
SPECIES_NAMES = {Q: "q", P: "p", CD: "cd", C: "c"}
LADDER, QP = "ladder", "qp"
BASES = (LADDER, QP)

Word = tuple


def gen(name: str, mode: int = 1) -> int:
    """Integer code of generator ``name`` (q, p, c, cd) on 1-based ``mode``."""
    if name not in SPECIES:
        raise ValueError(f"unknown generator {name!r}")
    if mode < 1:
        raise ValueError(f"mode index must be >= 1, got {mode}")
    return 4 * (mode - 1) + SPECIES[name]


def mode_of(g: int) -> int:
    return g >> 2


def species_of(g: int) -> int:
    return g & 3


def is_ladder(g: int) -> bool:
    return g & 3 >= CD


def generator_name(g: int, indexed: bool = False) -> str:
    name = SPECIES_NAMES[g & 3]
    return f"{name}[{(g >> 2) + 1}]" if indexed else name


# [a, b] for a > b on the same mode, both in one basis.
_COMMUTATOR = {(P, Q): -I_G, (C, CD): ONE_G}


class OperatorPolynomial:
    """Finite map from words to :class:`Scalar` coefficients.

    Multiplication concatenates words and performs *no* reordering; use
    :func:`normal_form` for a canonical representative.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Word, ScalarLike] | None = None):
        clean = {}
        for w, c in (terms or {}).items():
            c = Scalar.coerce(c)
            if c:
                clean[tuple(w)] = c
        self._terms = clean

    @classmethod
    def _raw(cls, terms: dict) -> "OperatorPolynomial":
        p = object.__new__(cls)
        p._terms = terms
        return p

    @classmethod
    def identity(cls) -> "OperatorPolynomial":
        return cls._raw({(): ONE})

    @classmethod
    def scalar(cls, value: ScalarLike) -> "OperatorPolynomial":
        return cls({(): value})

    @classmethod
    def generator(cls, name: str, mode: int = 1) -> "OperatorPolynomial":
        return cls._raw({(gen(name, mode),): ONE})

    @classmethod
    def word(cls, names: Iterable, coefficient: ScalarLike = 1) -> "OperatorPolynomial":
        """Build a single word from names like ``"cd"`` or ``("q", 2)``."""
        codes = []
        for n in names:
            if isinstance(n, int):
                codes.append(n)
            elif isinstance(n, str):
                codes.append(gen(n))
            else:
                codes.append(gen(*n))
        return cls({tuple(codes): coefficient})

    # -- structure -----------------------------------------------------------

    def items(self):
        return self._terms.items()

    def words(self):
        return self._terms.keys()

    def coefficient(self, word: Word) -> Scalar:
        return self._terms.get(tuple(word), ZERO)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __iter__(self) -> Iterator[Word]:
        return iter(self._terms)

    def degree(self) -> int:
        return max((len(w) for w in self._terms), default=-1)

    def is_scalar(self) -> bool:
        return all(not w for w in self._terms)

    def scalar_part(self) -> Scalar:
        return self._terms.get((), ZERO)

    @property
    def n_modes(self) -> int:
        return max((mode_of(g) + 1 for w in self._terms for g in w), default=0)

    @property
    def variables(self) -> frozenset:
        out = set()
        for c in self._terms.values():
            out |= c.variables
        return frozenset(out)

    def uses_ladder(self) -> bool:
        return any(is_ladder(g) for w in self._terms for g in w)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = _coerce_poly(other)
        if other is None:
            return NotImplemented
        return OperatorPolynomial._raw(_add_into(dict(self._terms), other._terms))

    __radd__ = __add__

    def __neg__(self):
        return OperatorPolynomial._raw({w: -c for w, c in self._terms.items()})

    def __sub__(self, other):
        other = _coerce_poly(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return _coerce_poly(other) - self

    def __mul__(self, other):
        if isinstance(other, (Scalar, Gaussian, int, Fraction, complex)):
            return self.scale(other)
        other = _coerce_poly(other)
        if other is None:
            return NotImplemented
        acc: dict = {}
        for w1, c1 in self._terms.items():
            for w2, c2 in other._terms.items():
                _acc(acc, w1 + w2, c1 * c2)
        return OperatorPolynomial._raw(acc)

    def __rmul__(self, other):
        if isinstance(other, (Scalar, Gaussian, int, Fraction, complex)):
            return self.scale(other)
        return _coerce_poly(other) * self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers are defined")
        result = OperatorPolynomial.identity()
        for _ in range(n):
            result = result * self
        return result

    def scale(self, s: ScalarLike) -> "OperatorPolynomial":
        s = Scalar.coerce(s)
        if not s:
            return OperatorPolynomial._raw({})
        out = {}
        for w, c in self._terms.items():
            v = c * s
            if v:
                out[w] = v
        return OperatorPolynomial._raw(out)

    def map_coefficients(self, f) -> "OperatorPolynomial":
        return OperatorPolynomial({w: f(c) for w, c in self._terms.items()})

    def substitute(self, bindings: Mapping[str, ScalarLike]) -> "OperatorPolynomial":
        """Bind indeterminates; binding a name absent from the coefficients is an error."""
        unknown = set(bindings) - self.variables
        if unknown:
            raise UnknownIndeterminateError(f"undeclared indeterminate(s): {sorted(unknown)}")
        return self.map_coefficients(lambda c: c.subs(bindings, strict=False))

    def __eq__(self, other):
        other = _coerce_poly(other)
        if other is None:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    # -- printing ------------------------------------------------------------

    def sorted_items(self):
        return sorted(self._terms.items(), key=lambda kv: (-len(kv[0]), kv[0]))

    def __str__(self):
        if not self._terms:
            return "0"
        indexed = self.n_modes > 1
        parts = []
        for w, c in self.sorted_items():
            parts.append(_term_str(c, word_str(w, indexed)))
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        return f"OperatorPolynomial({str(self)!r})"


def word_str(w: Word, indexed: bool = False) -> str:
    if not w:
        return ""
    out = []
    i = 0
    while i < len(w):
        j = i
        while j < len(w) and w[j] == w[i]:
            j += 1
        name = generator_name(w[i], indexed)
        out.append(name if j - i == 1 else f"{name}^{j - i}")
        i = j
    return "*".join(out)


def _term_str(c: Scalar, ws: str) -> str:
    if not ws:
        return str(c)
    if c == ONE:
        return ws
    if c == -ONE:
        return "-" + ws
    cs = str(c)
    if c.is_single_term():
        return f"{cs}*{ws}"
    return f"({cs})*{ws}"


def _coerce_poly(x):
    if isinstance(x, OperatorPolynomial):
        return x
    if isinstance(x, LinearCombination):
        return x.to_poly()
    try:
        return OperatorPolynomial.scalar(x)
    except TypeError:
        return None


def _acc(acc: dict, w: Word, c) -> None:
    v = acc.get(w)
    if v is None:
        if c:
            acc[w] = c
    else:
        v = v + c
        if v:
            acc[w] = v
        else:
            del acc[w]


def _add_into(acc: dict, terms) -> dict:
    for w, c in terms.items():
        _acc(acc, w, c)
    return acc


# -- basis conversion and normal ordering -------------------------------------

def _generator_in(g: int, basis: str) -> dict:
    """Expansion of a single generator in the target basis."""
    base = g & ~3
    sp = g & 3
    if basis == LADDER:
        if sp == Q:
            return {(base + CD,): INV_SQRT2, (base + C,): INV_SQRT2}
        if sp == P:
            return {(base + C,): -I * INV_SQRT2, (base + CD,): I * INV_SQRT2}
    else:
        if sp == C:
            return {(base + Q,): INV_SQRT2, (base + P,): I * INV_SQRT2}
        if sp == CD:
            return {(base + Q,): INV_SQRT2, (base + P,): -I * INV_SQRT2}
    return {(g,): ONE}


def _in_basis(g: int, basis: str) -> bool:
    return is_ladder(g) == (basis == LADDER)


@lru_cache(maxsize=None)
def _convert_word(w: Word, basis: str) -> tuple:
    if all(_in_basis(g, basis) for g in w):
        return ((w, ONE),)
    acc = {(): ONE}
    for g in w:
        nxt: dict = {}
        for pre, c in acc.items():
            for suf, d in _generator_in(g, basis).items():
                _acc(nxt, pre + suf, c * d)
        acc = nxt
    return tuple(acc.items())


@lru_cache(maxsize=None)
def _sorted_word(w: Word) -> tuple:
    """Bubble-sort a single-basis word with commutator side terms."""
    for i in range(len(w) - 1):
        a, b = w[i], w[i + 1]
        if a > b:
            break
    else:
        return ((w, ONE_G),)
    acc: dict = {}
    for v, c in _sorted_word(w[:i] + (b, a) + w[i + 2:]):
        _acc(acc, v, c)
    if (a >> 2) == (b >> 2):
        comm = _COMMUTATOR.get((a & 3, b & 3))
        if comm is None:
            raise ValueError("word mixes ladder and canonical generators of one mode")
        for v, c in _sorted_word(w[:i] + w[i + 2:]):
            _acc(acc, v, comm * c)
    return tuple(acc.items())


def resolve_basis(p: OperatorPolynomial, basis: str | None) -> str:
    if basis is None:
        return LADDER if p.uses_ladder() else QP
    if basis not in BASES:
        raise ValueError(f"unknown basis {basis!r}; expected one of {BASES}")
    return basis


def normal_form(p: OperatorPolynomial, basis: str | None = None) -> OperatorPolynomial:
    """Canonical representative of ``p`` as an operator.

    Every word is rewritten in ``basis`` (``"ladder"`` or ``"qp"``; by default
    ladder whenever ``p`` mentions ``c`` or ``cd``) and sorted so that, per
    mode, ``cd`` precede ``c`` (resp. ``q`` precede ``p``), modes ascending.
    """
    basis = resolve_basis(p, basis)
    acc: dict = {}
    for w, c in p.items():
        for v, d in _convert_word(w, basis):
            cd = c * d
            for u, e in _sorted_word(v):
                _acc(acc, u, cd * e)
    return OperatorPolynomial._raw(acc)


# -- fast products of normal-ordered polynomials -------------------------------
#
# A normal-ordered word per mode is first^x second^y (q^x p^y or cd^x c^y).
# Moving second^y past first^x' yields
#     sum_k omega^k k! C(y,k) C(x',k) first^(x+x'-k) second^(y+y'-k)
# with omega = [second, first] (1 for ladder, -i for qp).  This is the closed
# form of the bubble sort above and is cross-checked against it in the tests.

def word_to_exponents(w: Word, n_modes: int) -> tuple:
    e = [0] * (2 * n_modes)
    for g in w:
        e[2 * (g >> 2) + (g & 1)] += 1
    return tuple(e)


def exponents_to_word(e: tuple, basis: str) -> Word:
    first, second = (CD, C) if basis == LADDER else (Q, P)
    out = []
    for m in range(len(e) // 2):
        out += [4 * m + first] * e[2 * m]
        out += [4 * m + second] * e[2 * m + 1]
    return tuple(out)


@lru_cache(maxsize=None)
def _mode_product(x1: int, y1: int, x2: int, y2: int, basis: str) -> tuple:
    omega = ONE_G if basis == LADDER else -I_G
    out = []
    for k in range(min(y1, x2) + 1):
        coeff = omega ** k * (factorial(k) * comb(y1, k) * comb(x2, k))
        out.append(((x1 + x2 - k, y1 + y2 - k), coeff))
    return tuple(out)


@lru_cache(maxsize=200000)
def exponent_product(e1: tuple, e2: tuple, basis: str) -> tuple:
    """Normal-ordered product of two normal-ordered monomials (exponent form)."""
    results = [((), ONE_G)]
    for m in range(len(e1) // 2):
        pieces = _mode_product(e1[2 * m], e1[2 * m + 1], e2[2 * m], e2[2 * m + 1], basis)
        if len(pieces) == 1:
            (xy, c), = pieces
            results = [(pre + xy, d * c if c != ONE_G else d) for pre, d in results]
        else:
            results = [(pre + xy, d * c) for pre, d in results for xy, c in pieces]
    return tuple(results)


def exponent_poly_product(a: Mapping, b: Mapping, basis: str, keep=None) -> dict:
    """Product of two exponent-keyed normal-ordered polynomials.

    ``keep`` optionally filters result monomials (used for degree truncation).
    Coefficients may be :class:`Gaussian` or :class:`Scalar`.
    """
    acc: dict = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            c12 = c1 * c2
            for e, k in exponent_product(e1, e2, basis):
                if keep is not None and not keep(e):
                    continue
                v = acc.get(e)
                t = c12 * k if k != ONE_G else c12
                if v is None:
                    acc[e] = t
                else:
                    v = v + t
                    if v:
                        acc[e] = v
                    else:
                        del acc[e]
    return {e: c for e, c in acc.items() if c}


def to_exponent_poly(p: OperatorPolynomial, n_modes: int, basis: str) -> dict:
    nf = normal_form(p, basis)
    return {word_to_exponents(w, n_modes): _lower(c) for w, c in nf.items()}


def from_exponent_poly(d: Mapping, basis: str) -> OperatorPolynomial:
    return OperatorPolynomial({exponents_to_word(e, basis): Scalar.coerce(c) for e, c in d.items()})


def _lower(c: Scalar):
    """Use a bare Gaussian when possible; it multiplies much faster than a Scalar."""
    return c.as_gaussian() if c.is_gaussian() else c


def normal_product(a: OperatorPolynomial, b: OperatorPolynomial, basis: str | None = None) -> OperatorPolynomial:
    """``normal_form(a * b)`` computed with the closed-form reordering rule."""
    basis = basis or (LADDER if (a.uses_ladder() or b.uses_ladder()) else QP)
    n = max(a.n_modes, b.n_modes, 1)
    ea = to_exponent_poly(a, n, basis)
    eb = to_exponent_poly(b, n, basis)
    return from_exponent_poly(exponent_poly_product(ea, eb, basis), basis)


# -- linear combinations -------------------------------------------------------

class LinearCombination:
    """``X = sum_k a_k x_k`` over ``x = (q_1..q_n, p_1..p_n)``.

    ``ladder`` is only a display/basis hint; coefficients are always stored
    over the canonical ``q, p`` generators.
    """

    __slots__ = ("coefficients", "n_modes", "ladder")

    def __init__(self, coefficients: Sequence[ScalarLike], ladder: bool = False):
        coefficients = tuple(Scalar.coerce(c) for c in coefficients)
        if not coefficients or len(coefficients) % 2:
            raise DimensionError("a linear combination needs 2n coefficients")
        self.coefficients = coefficients
        self.n_modes = len(coefficients) // 2
        self.ladder = ladder

    @classmethod
    def zero(cls, n_modes: int = 1) -> "LinearCombination":
        return cls([0] * (2 * n_modes))

    @classmethod
    def from_qp(cls, q: Sequence[ScalarLike], p: Sequence[ScalarLike]) -> "LinearCombination":
        if len(q) != len(p):
            raise DimensionError("q and p coefficient vectors differ in length")
        return cls(list(q) + list(p))

    @classmethod
    def from_ladder(cls, c: Sequence[ScalarLike], cd: Sequence[ScalarLike]) -> "LinearCombination":
        """``sum_k (c_k * c_k + cd_k * c^dagger_k)`` in terms of q, p."""
        if len(c) != len(cd):
            raise DimensionError("c and cd coefficient vectors differ in length")
        a = [Scalar.coerce(x) for x in c]
        b = [Scalar.coerce(x) for x in cd]
        qs = [(x + y) * INV_SQRT2 for x, y in zip(a, b)]
        ps = [(x - y) * I * INV_SQRT2 for x, y in zip(a, b)]
        return cls(qs + ps, ladder=True)

    @classmethod
    def generator(cls, name: str, mode: int = 1, n_modes: int = 1) -> "LinearCombination":
        if not 1 <= mode <= n_modes:
            raise DimensionError(f"mode {mode} outside 1..{n_modes}")
        unit = [0] * n_modes
        unit[mode - 1] = 1
        zero = [0] * n_modes
        if name == "q":
            return cls.from_qp(unit, zero)
        if name == "p":
            return cls.from_qp(zero, unit)
        if name == "c":
            return cls.from_ladder(unit, zero)
        if name == "cd":
            return cls.from_ladder(zero, unit)
        raise ValueError(f"unknown generator {name!r}")

    @classmethod
    def from_poly(cls, p: OperatorPolynomial, n_modes: int | None = None) -> "LinearCombination":
        """Read a degree-1 polynomial (no constant term) back as a combination."""
        n = n_modes or max(p.n_modes, 1)
        if p.n_modes > n:
            raise DimensionError(f"polynomial uses {p.n_modes} modes, system has {n}")
        nf = normal_form(p, QP)
        coeffs = [ZERO] * (2 * n)
        for w, c in nf.items():
            if len(w) != 1:
                raise ValueError(f"{p} is not a linear combination of canonical generators")
            g = w[0]
            coeffs[(g >> 2) + (n if g & 3 == P else 0)] = c
        return cls(coeffs, ladder=p.uses_ladder())

    @property
    def q_part(self) -> tuple:
        return self.coefficients[: self.n_modes]

    @property
    def p_part(self) -> tuple:
        return self.coefficients[self.n_modes:]

    def ladder_coefficients(self) -> tuple[tuple, tuple]:
        """Coefficients ``(c_k, cd_k)`` with ``X = sum c_k c_k + cd_k c^dagger_k``."""
        cs, cds = [], []
        for a, b in zip(self.q_part, self.p_part):
            cs.append((a - I * b) * INV_SQRT2)
            cds.append((a + I * b) * INV_SQRT2)
        return tuple(cs), tuple(cds)

    def to_poly(self, basis: str | None = None) -> OperatorPolynomial:
        basis = basis or (LADDER if self.ladder else QP)
        n = self.n_modes
        terms: dict = {}
        if basis == QP:
            for k in range(n):
                _acc(terms, (4 * k + Q,), self.coefficients[k])
                _acc(terms, (4 * k + P,), self.coefficients[n + k])
        else:
            cs, cds = self.ladder_coefficients()
            for k in range(n):
                _acc(terms, (4 * k + CD,), cds[k])
                _acc(terms, (4 * k + C,), cs[k])
        return OperatorPolynomial._raw(terms)

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def _check(self, other: "LinearCombination") -> None:
        if not isinstance(other, LinearCombination):
            raise TypeError("expected a LinearCombination")
        if other.n_modes != self.n_modes:
            raise DimensionError(f"generator systems differ: {self.n_modes} vs {other.n_modes} modes")

    def __add__(self, other):
        self._check(other)
        return LinearCombination(
            [a + b for a, b in zip(self.coefficients, other.coefficients)], self.ladder or other.ladder
        )

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return LinearCombination([-a for a in self.coefficients], self.ladder)

    def __mul__(self, s):
        if isinstance(s, (LinearCombination, OperatorPolynomial)):
            return self.to_poly() * s
        s = Scalar.coerce(s)
        return LinearCombination([a * s for a in self.coefficients], self.ladder)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, LinearCombination):
            return NotImplemented
        return self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)

    def __str__(self):
        return str(self.to_poly())

    def __repr__(self):
        return f"LinearCombination({str(self)!r})"


def commutator_scalar(x: LinearCombination, y: LinearCombination) -> Scalar:
    """The c-number ``[X, Y] = i sum_k (a_k b'_k - a'_k b_k)``.

    Unprimed coefficients belong to ``q_k``, primed ones to ``p_k``.
    """
    x._check(y)
    total = ZERO
    for a, ap, b, bp in zip(x.q_part, x.p_part, y.q_part, y.p_part):
        total = total + a * bp - ap * b
    return I * total
