"""Exact c-number arithmetic.

Two layers live here:

* :class:`Gaussian` -- an exact complex rational ``re + i*im``.
* :class:`Scalar` -- a polynomial in named commuting indeterminates whose
  coefficients are Gaussian rationals, with an adjoined exact factor
  ``sqrt(2)`` tracked per monomial.  ``sqrt(2)**2`` is folded back into the
  rational coefficient, so every monomial carries either no or one factor
  of ``sqrt(2)``.  This keeps conversions between the ``q, p`` and
  ``c, c^dagger`` bases lossless.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Mapping, Union

from gmpy2 import mpq

from .errors import SymbolicResidueError, UnknownIndeterminateError

_MPQ = type(mpq())


def rational(x) -> mpq:
    """Convert ``x`` (int, Fraction, mpq, exact float or string) to an mpq."""
    if isinstance(x, _MPQ):
        return x
    if isinstance(x, int):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        f = Fraction(x.strip())
        return mpq(f.numerator, f.denominator)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"cannot convert {x!r} to an exact rational")
        f = Fraction(x)
        return mpq(f.numerator, f.denominator)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def to_fraction(x: mpq) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def format_rational(x: mpq) -> str:
    return str(x)


class Gaussian:
    """Exact complex rational number."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = rational(re)
        self.im = rational(im)

    @classmethod
    def _make(cls, re: mpq, im: mpq) -> "Gaussian":
        g = object.__new__(cls)
        g.re = re
        g.im = im
        return g

    @classmethod
    def coerce(cls, x) -> "Gaussian":
        if isinstance(x, Gaussian):
            return x
        if isinstance(x, complex):
            return cls(x.real, x.imag)
        return cls._make(rational(x), _ZQ)

    def __add__(self, other):
        if isinstance(other, Gaussian):
            return Gaussian._make(self.re + other.re, self.im + other.im)
        if isinstance(other, (int, _MPQ, Fraction)):
            return Gaussian._make(self.re + rational(other), self.im)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Gaussian):
            return Gaussian._make(self.re - other.re, self.im - other.im)
        if isinstance(other, (int, _MPQ, Fraction)):
            return Gaussian._make(self.re - rational(other), self.im)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, _MPQ, Fraction)):
            return Gaussian._make(rational(other) - self.re, -self.im)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Gaussian):
            a, b, c, d = self.re, self.im, other.re, other.im
            if not b:
                return Gaussian._make(a * c, a * d)
            if not d:
                return Gaussian._make(a * c, b * c)
            return Gaussian._make(a * c - b * d, a * d + b * c)
        if isinstance(other, (int, _MPQ, Fraction)):
            r = rational(other)
            return Gaussian._make(self.re * r, self.im * r)
        return NotImplemented

    __rmul__ = __mul__

    def __neg__(self):
        return Gaussian._make(-self.re, -self.im)

    def __truediv__(self, other):
        other = Gaussian.coerce(other) if not isinstance(other, Gaussian) else other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return Gaussian.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        result = ONE_G
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self) -> "Gaussian":
        d = self.re * self.re + self.im * self.im
        if not d:
            raise ZeroDivisionError("inverse of zero")
        return Gaussian._make(self.re / d, -self.im / d)

    def conjugate(self) -> "Gaussian":
        return Gaussian._make(self.re, -self.im)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if isinstance(other, Gaussian):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, _MPQ, Fraction)):
            return not self.im and self.re == other
        if isinstance(other, complex):
            return self.re == other.real and self.im == other.imag
        return NotImplemented

    def __hash__(self):
        if not self.im:
            return hash(to_fraction(self.re))
        return hash((to_fraction(self.re), to_fraction(self.im)))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"Gaussian({self.re}, {self.im})"

    def __str__(self):
        if not self.im:
            return format_rational(self.re)
        im = _imag_str(self.im)
        if not self.re:
            return im
        sign = "-" if self.im < 0 else "+"
        return f"({self.re} {sign} {_imag_str(abs(self.im))})"


def _imag_str(x: mpq) -> str:
    if x == 1:
        return "i"
    if x == -1:
        return "-i"
    return f"{x}*i"


_ZQ = mpq(0)
ZERO_G = Gaussian._make(mpq(0), mpq(0))
ONE_G = Gaussian._make(mpq(1), mpq(0))
I_G = Gaussian._make(mpq(0), mpq(1))

# A monomial is a sorted tuple of (name, exponent) pairs; a key adds the
# sqrt(2) parity bit.
Monomial = tuple
Key = tuple

_UNIT: Key = ((), 0)


@lru_cache(maxsize=65536)
def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for name, e in b:
        d[name] = d.get(name, 0) + e
    return tuple(sorted(d.items()))


ScalarLike = Union["Scalar", Gaussian, int, Fraction, str, complex]


class Scalar:
    """Polynomial over Gaussian rationals with an exact adjoined ``sqrt(2)``.

    Instances are immutable.  Use :meth:`var` to make an indeterminate and the
    usual arithmetic operators to combine them::

        >>> z = Scalar.var("z")
        >>> str((z + 1) ** 2)
        'z^2 + 2*z + 1'
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, value: ScalarLike = 0):
        if isinstance(value, Scalar):
            self._terms = value._terms
        else:
            g = Gaussian.coerce(value)
            self._terms = {_UNIT: g} if g else {}
        self._hash = None

    @classmethod
    def _from_terms(cls, terms: dict) -> "Scalar":
        s = object.__new__(cls)
        s._terms = terms
        s._hash = None
        return s

    @classmethod
    def var(cls, name: str) -> "Scalar":
        if not name.isidentifier():
            raise ValueError(f"invalid indeterminate name {name!r}")
        return cls._from_terms({(((name, 1),), 0): ONE_G})

    @classmethod
    def sqrt2(cls) -> "Scalar":
        return cls._from_terms({((), 1): ONE_G})

    @classmethod
    def i(cls) -> "Scalar":
        return cls._from_terms({_UNIT: I_G})

    @classmethod
    def coerce(cls, x: ScalarLike) -> "Scalar":
        return x if isinstance(x, Scalar) else cls(x)

    # -- structure -----------------------------------------------------------

    def terms(self) -> Iterator[tuple[Monomial, int, Gaussian]]:
        """Yield ``(monomial, sqrt2_power, coefficient)`` triples."""
        for (mono, h), g in self._terms.items():
            yield mono, h, g

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def is_constant(self) -> bool:
        return all(not mono for mono, _ in self._terms)

    def is_gaussian(self) -> bool:
        """True when the value is a plain Gaussian rational (no sqrt(2), no symbols)."""
        return all(k == _UNIT for k in self._terms)

    def as_gaussian(self) -> Gaussian:
        if not self.is_gaussian():
            raise ValueError(f"{self} is not a Gaussian rational")
        return self._terms.get(_UNIT, ZERO_G)

    @property
    def variables(self) -> frozenset:
        return frozenset(name for (mono, _) in self._terms for name, _ in mono)

    def degree(self, names=None) -> int:
        """Total degree, counting only ``names`` when given; -1 for zero."""
        if not self._terms:
            return -1
        if names is None:
            return max(sum(e for _, e in mono) for mono, _ in self._terms)
        names = set(names)
        return max(sum(e for n, e in mono if n in names) for mono, _ in self._terms)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar(other)
            except TypeError:
                return NotImplemented
        if not other._terms:
            return self
        if not self._terms:
            return other
        terms = dict(self._terms)
        for k, g in other._terms.items():
            v = terms.get(k)
            if v is None:
                terms[k] = g
            else:
                v = v + g
                if v:
                    terms[k] = v
                else:
                    del terms[k]
        return Scalar._from_terms(terms)

    __radd__ = __add__

    def __neg__(self):
        return Scalar._from_terms({k: -g for k, g in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return Scalar(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, Gaussian):
            if not other:
                return ZERO
            return Scalar._from_terms({k: g * other for k, g in self._terms.items()})
        if not isinstance(other, Scalar):
            try:
                other = Scalar(other)
            except TypeError:
                return NotImplemented
        terms: dict = {}
        for (m1, h1), g1 in self._terms.items():
            for (m2, h2), g2 in other._terms.items():
                g = g1 * g2
                h = h1 + h2
                if h == 2:
                    h = 0
                    g = g * 2
                k = (_mono_mul(m1, m2), h)
                v = terms.get(k)
                terms[k] = g if v is None else v + g
        return Scalar._from_terms({k: g for k, g in terms.items() if g})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result = ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self) -> "Scalar":
        """Multiplicative inverse; only constants ``a + b*sqrt(2)`` are invertible."""
        if not self.is_constant():
            raise ZeroDivisionError(f"cannot invert non-constant scalar {self}")
        a = self._terms.get(((), 0), ZERO_G)
        b = self._terms.get(((), 1), ZERO_G)
        # (a + b r)^-1 = (a - b r) / (a^2 - 2 b^2), with r = sqrt(2)
        norm = a * a - b * b * 2
        if not norm:
            raise ZeroDivisionError("inverse of zero")
        inv = norm.inverse()
        return Scalar._from_terms(
            {k: g for k, g in {((), 0): a * inv, ((), 1): -b * inv}.items() if g}
        )

    def __truediv__(self, other):
        if isinstance(other, Gaussian):
            return self * other.inverse()
        if not isinstance(other, Scalar):
            try:
                other = Scalar(other)
            except TypeError:
                return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return Scalar(other) * self.inverse()

    def conjugate(self) -> "Scalar":
        """Complex-conjugate the coefficients; indeterminates are left alone."""
        return Scalar._from_terms({k: g.conjugate() for k, g in self._terms.items()})

    # -- comparison ----------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Scalar):
            try:
                other = Scalar(other)
            except TypeError:
                return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def sign(self) -> int:
        """Sign of a real constant ``a + b*sqrt(2)``; raises for anything else."""
        if not self.is_constant():
            raise ValueError(f"{self} is not a constant")
        a = self._terms.get(((), 0), ZERO_G)
        b = self._terms.get(((), 1), ZERO_G)
        if a.im or b.im:
            raise ValueError(f"{self} is not real")
        sa = (a.re > 0) - (a.re < 0)
        sb = (b.re > 0) - (b.re < 0)
        if sa == 0 or sa == sb:
            return sb if sa == 0 else sa
        if sb == 0:
            return sa
        # opposite signs: compare a^2 with 2 b^2
        d = a.re * a.re - 2 * b.re * b.re
        return sa if d > 0 else (sb if d < 0 else 0)

    def is_real_nonnegative(self) -> bool:
        try:
            return self.sign() >= 0
        except ValueError:
            return False

    # -- substitution and evaluation -----------------------------------------

    def subs(self, bindings: Mapping[str, ScalarLike], strict: bool = True) -> "Scalar":
        """Ring homomorphism replacing indeterminates by scalars."""
        if strict:
            unknown = set(bindings) - self.variables
            if unknown:
                raise UnknownIndeterminateError(
                    f"indeterminate(s) {sorted(unknown)} not present in {self}"
                )
        bound = {n: Scalar.coerce(v) for n, v in bindings.items()}
        if not bound or not (self.variables & bound.keys()):
            return self
        result = ZERO
        for (mono, h), g in self._terms.items():
            rest = []
            factor = Scalar._from_terms({((), h): g})
            for name, e in mono:
                if name in bound:
                    factor = factor * bound[name] ** e
                else:
                    rest.append((name, e))
            if rest:
                factor = factor * Scalar._from_terms({(tuple(rest), 0): ONE_G})
            result = result + factor
        return result

    def to_complex(self, bindings: Mapping[str, complex] | None = None) -> complex:
        """Numeric value; every indeterminate must be bound."""
        bindings = bindings or {}
        total = 0j
        for (mono, h), g in self._terms.items():
            v = complex(g) * (math.sqrt(2.0) if h else 1.0)
            for name, e in mono:
                if name not in bindings:
                    raise SymbolicResidueError(f"indeterminate {name!r} has no numeric value")
                v *= complex(bindings[name]) ** e
            total += v
        return total

    def __complex__(self):
        return self.to_complex()

    def to_sympy(self, symbols: Mapping[str, object] | None = None):
        import sympy

        symbols = dict(symbols or {})
        expr = sympy.Integer(0)
        for (mono, h), g in self._terms.items():
            term = sympy.Rational(int(g.re.numerator), int(g.re.denominator)) + sympy.I * sympy.Rational(
                int(g.im.numerator), int(g.im.denominator)
            )
            if h:
                term *= sympy.sqrt(2)
            for name, e in mono:
                if name not in symbols:
                    symbols[name] = sympy.Symbol(name)
                term *= symbols[name] ** e
            expr += term
        return expr

    # -- printing ------------------------------------------------------------

    def _sorted_items(self):
        def key(item):
            (mono, h), _ = item
            return (-sum(e for _, e in mono), mono, h)

        return sorted(self._terms.items(), key=key)

    def __str__(self):
        if not self._terms:
            return "0"
        pieces = []
        for (mono, h), g in self._sorted_items():
            pieces.append(_term_str(g, h, mono))
        out = pieces[0]
        for p in pieces[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out

    def __repr__(self):
        return f"Scalar({str(self)!r})"

    def is_single_term(self) -> bool:
        return len(self._terms) == 1


def _term_str(g: Gaussian, h: int, mono: Monomial) -> str:
    symbols = []
    if h:
        symbols.append("sqrt2")
    for name, e in mono:
        symbols.append(name if e == 1 else f"{name}^{e}")
    tail = "*".join(symbols)
    if not g.im:
        num = g.re
        neg = num < 0
        num = abs(num)
        if tail:
            body = tail if num == 1 else f"{num}*{tail}"
        else:
            body = str(num)
        return ("-" if neg else "") + body
    if not g.re:
        num = g.im
        neg = num < 0
        num = abs(num)
        coef = "i" if num == 1 else f"{num}*i"
        body = f"{coef}*{tail}" if tail else coef
        return ("-" if neg else "") + body
    coef = str(g)
    return f"{coef}*{tail}" if tail else coef


ZERO = Scalar._from_terms({})
ONE = Scalar._from_terms({_UNIT: ONE_G})
I = Scalar._from_terms({_UNIT: I_G})
SQRT2 = Scalar.sqrt2()
INV_SQRT2 = SQRT2 * Scalar(Fraction(1, 2))
