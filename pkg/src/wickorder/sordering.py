"""s-ordering of a single mode through path orderings.

An increasing path ``chi: [0, 1] -> [0, 1]`` induces an ordering of
``exp(lambda c^dagger + lambda* c)``: the ``c`` part is spread uniformly over
the unit interval and the ``c^dagger`` part along ``d chi``; later factors go
left.  The resulting ordering is the s-ordering with ``s = 1 - 2 int chi``.

Paths are piecewise polynomials with exact rational data.  Jumps are
allowed and act as point masses of ``d chi``; ``jump_at(a)`` reaches
``s = 2a - 1``, in particular normal (``a = 1``) and anti-normal (``a = 0``)
ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb, factorial
from typing import Iterator, Mapping, Sequence

import sympy

from .algebra import OperatorPolynomial, normal_form
from .errors import InternalConsistencyError, InvariantError, SizeError
from .orderings import MixedScheme, apply_scheme
from .scalar import ONE, ZERO, Scalar, ScalarLike

# -- exact polynomials: ascending coefficient tuples of Fractions -----------------

Poly = tuple


def _trim(p) -> Poly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def poly_add(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return _trim((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))


def poly_scale(a: Poly, s) -> Poly:
    return _trim(c * s for c in a)


def poly_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim(out)


def poly_eval(a: Poly, t) -> Fraction:
    v = Fraction(0)
    for c in reversed(a):
        v = v * t + c
    return v


def poly_antiderivative(a: Poly) -> Poly:
    """Antiderivative vanishing at 0."""
    return _trim([Fraction(0)] + [c / (k + 1) for k, c in enumerate(a)])


def poly_derivative(a: Poly) -> Poly:
    return _trim(k * c for k, c in enumerate(a) if k)


class PiecewisePoly:
    """Polynomial on each interval ``[t_i, t_{i+1}]`` of a rational partition of ``[0, 1]``.

    Values at the breakpoints are irrelevant for integration; they are
    resolved by :class:`ChiPath` where they matter.
    """

    __slots__ = ("breaks", "pieces")

    def __init__(self, breaks: Sequence, pieces: Sequence[Sequence]):
        self.breaks = tuple(Fraction(b) for b in breaks)
        self.pieces = tuple(_trim(Fraction(c) for c in p) for p in pieces)
        if len(self.pieces) != len(self.breaks) - 1:
            raise ValueError("need one polynomial per interval")
        if self.breaks[0] != 0 or self.breaks[-1] != 1:
            raise ValueError("partition must run from 0 to 1")
        if any(a >= b for a, b in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breakpoints must increase strictly")

    @classmethod
    def constant(cls, value, breaks=(0, 1)) -> "PiecewisePoly":
        return cls(breaks, [(Fraction(value),)] * (len(breaks) - 1))

    def _zip(self, other: "PiecewisePoly"):
        if self.breaks != other.breaks:
            raise ValueError("piecewise polynomials live on different partitions")
        return zip(self.pieces, other.pieces)

    def __add__(self, other):
        if not isinstance(other, PiecewisePoly):
            other = PiecewisePoly.constant(other, self.breaks)
        return PiecewisePoly(self.breaks, [poly_add(a, b) for a, b in self._zip(other)])

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PiecewisePoly):
            return PiecewisePoly(self.breaks, [poly_mul(a, b) for a, b in self._zip(other)])
        return PiecewisePoly(self.breaks, [poly_scale(a, Fraction(other)) for a in self.pieces])

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = PiecewisePoly.constant(1, self.breaks)
        for _ in range(k):
            out = out * self
        return out

    def cumulative(self) -> "PiecewisePoly":
        """``u -> int_0^u f``, continuous across breakpoints."""
        out = []
        offset = Fraction(0)
        for (a, b), p in zip(self.intervals(), self.pieces):
            anti = poly_antiderivative(p)
            shift = offset - poly_eval(anti, a)
            out.append(poly_add(anti, (shift,)))
            offset = poly_eval(anti, b) + shift
        return PiecewisePoly(self.breaks, out)

    def integral(self) -> Fraction:
        total = Fraction(0)
        for (a, b), p in zip(self.intervals(), self.pieces):
            anti = poly_antiderivative(p)
            total += poly_eval(anti, b) - poly_eval(anti, a)
        return total

    def intervals(self) -> Iterator[tuple[Fraction, Fraction]]:
        return zip(self.breaks, self.breaks[1:])


# -- paths -----------------------------------------------------------------------

class ChiPath:
    """Non-decreasing piecewise-polynomial path from 0 to 1 on ``[0, 1]``.

    ``chi(0) = 0`` and ``chi(1) = 1`` hold by definition; a first piece that
    starts above 0 or a last piece that ends below 1 contributes a jump at
    the corresponding endpoint.  Interior jumps sit at breakpoints.  The path
    is right-continuous, so ``chi(t)`` is the measure of ``[0, t]``.
    """

    def __init__(self, breaks: Sequence, pieces: Sequence[Sequence]):
        self.poly = PiecewisePoly(breaks, pieces)
        self._validate()

    @classmethod
    def identity(cls) -> "ChiPath":
        return cls((0, 1), [(0, 1)])

    @classmethod
    def power(cls, k: int) -> "ChiPath":
        if int(k) != k or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        return cls((0, 1), [(0,) * int(k) + (1,)])

    @classmethod
    def jump_at(cls, a) -> "ChiPath":
        """0 before ``a``, 1 from ``a`` on."""
        a = Fraction(a)
        if not 0 <= a <= 1:
            raise ValueError("jump location must lie in [0, 1]")
        if a == 0:
            return cls((0, 1), [(1,)])
        if a == 1:
            return cls((0, 1), [(0,)])
        return cls((0, a, 1), [(0,), (1,)])

    @property
    def breaks(self) -> tuple:
        return self.poly.breaks

    def atoms(self) -> dict[Fraction, Fraction]:
        """Jump sizes of ``chi`` (point masses of ``d chi``)."""
        out = {}
        left = Fraction(0)
        for (a, b), p in zip(self.poly.intervals(), self.poly.pieces):
            start = poly_eval(p, a)
            if start != left:
                out[a] = start - left
            left = poly_eval(p, b)
        if left != 1:
            out[Fraction(1)] = 1 - left
        return out

    def __call__(self, t) -> Fraction:
        t = Fraction(t)
        if not 0 <= t <= 1:
            raise ValueError("chi is defined on [0, 1]")
        if t == 1:
            return Fraction(1)
        for (a, b), p in zip(self.poly.intervals(), self.poly.pieces):
            if a <= t < b:
                return poly_eval(p, t)
        raise AssertionError("unreachable")

    def _validate(self) -> None:
        for a, mass in self.atoms().items():
            if mass < 0:
                raise InvariantError(f"chi decreases by {-mass} at t = {a}")
        tau = sympy.Symbol("tau")
        for (a, b), p in zip(self.poly.intervals(), self.poly.pieces):
            if not _nonnegative_on(poly_derivative(p), a, b, tau):
                raise InvariantError(f"chi decreases on [{a}, {b}]")

    def __repr__(self):
        return f"ChiPath(breaks={list(map(str, self.breaks))}, pieces={self.poly.pieces})"


def _nonnegative_on(p: Poly, a: Fraction, b: Fraction, tau) -> bool:
    """Exact sign check of a rational polynomial on ``[a, b]``.

    A sign change inside ``(a, b)`` needs a root of odd multiplicity there;
    without one the sign is constant away from the roots and a single
    non-root probe decides it.
    """
    if not p:
        return True
    sp = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(p)], tau)
    if sp.degree() == 0:
        return p[0] >= 0
    lo = sympy.Rational(a.numerator, a.denominator)
    hi = sympy.Rational(b.numerator, b.denominator)
    odd = sympy.Poly(1, tau)
    for factor, multiplicity in sp.sqf_list()[1]:
        if multiplicity % 2:
            odd = odd * factor
    if odd.degree() > 0:
        inside = odd.count_roots(lo, hi) - (odd.eval(lo) == 0) - (odd.eval(hi) == 0)
        if inside > 0:
            return False
    steps = sp.degree() + 2
    for k in range(1, steps):
        value = poly_eval(p, a + (b - a) * Fraction(k, steps))
        if value:
            return value > 0
    raise AssertionError("a non-zero polynomial vanished at more points than its degree")


def s_of_chi(chi: ChiPath) -> Scalar:
    """``s = 1 - 2 int_0^1 chi``."""
    return Scalar(1 - 2 * chi.poly.integral())


# -- closed form and its oracle --------------------------------------------------

def s_ordered_value(n: int, m: int, s: ScalarLike, mode: int = 1) -> OperatorPolynomial:
    """s-ordered ``c^n (c^dagger)^m`` in normal form.

    ``sum_j n! m! / (j! (n-j)! (m-j)!) ((1 - s)/2)^j (c^dagger)^(m-j) c^(n-j)``
    """
    if n < 0 or m < 0:
        raise ValueError("powers must be non-negative")
    half = (ONE - Scalar.coerce(s)) / Scalar(2)
    terms = {}
    for j in range(min(n, m) + 1):
        coeff = Fraction(factorial(n) * factorial(m), factorial(j) * factorial(n - j) * factorial(m - j))
        word = ("cd",) * (m - j) + ("c",) * (n - j)
        terms[word] = half ** j * Scalar(coeff)
    out = OperatorPolynomial()
    for word, c in terms.items():
        if c:
            out = out + OperatorPolynomial.word([(g, mode) for g in word], c)
    return out


def _coefficient(x: Scalar, powers: Mapping[str, int]) -> Scalar:
    """Coefficient of the monomial ``prod name^k`` (other indeterminates kept)."""
    out = {}
    for mono, h, g in x.terms():
        exps = dict(mono)
        if all(exps.get(k, 0) == v for k, v in powers.items()):
            rest = tuple((k, v) for k, v in mono if k not in powers)
            out[(rest, h)] = g
    return Scalar._from_terms(out)


def s_ordered_by_expansion(n: int, m: int, s: ScalarLike) -> OperatorPolynomial:
    """Independent route: read the s-ordered monomial off the generating function.

    ``O_s exp(X) = exp(-s lambda lambda* / 2) exp(X)`` with
    ``X = lambda c^dagger + lambda* c``; the coefficient of
    ``lambda^m lambda*^n`` is ``O_s(c^n (c^dagger)^m) / (n! m!)``.
    """
    lam, lamc = Scalar.var("lambda_"), Scalar.var("lambdac_")
    x = OperatorPolynomial.word(["cd"], lam) + OperatorPolynomial.word(["c"], lamc)
    shift = -Scalar.coerce(s) * lam * lamc / Scalar(2)
    k = n + m
    total = OperatorPolynomial()
    for j in range(k // 2 + 1):
        power = normal_form(x ** (k - 2 * j), "ladder") if k - 2 * j else OperatorPolynomial.identity()
        coeff = shift ** j / Scalar(factorial(j) * factorial(k - 2 * j))
        total = total + power.scale(coeff)
    scale = Scalar(factorial(n) * factorial(m))
    out = OperatorPolynomial()
    for word, c in normal_form(total, "ladder").items():
        picked = _coefficient(c, {"lambda_": m, "lambdac_": n})
        if picked:
            out = out + OperatorPolynomial({word: picked * scale})
    return out


# -- interleaving weights --------------------------------------------------------

DEFAULT_SIZE_BOUND = 8


def patterns(n: int, m: int) -> list[str]:
    """All arrangements of ``n`` letters ``c`` and ``m`` letters ``d`` (``d`` = c^dagger)."""
    out = []
    for pos in combinations(range(n + m), m):
        out.append("".join("d" if i in pos else "c" for i in range(n + m)))
    return sorted(out)


def pattern_word(pattern: str) -> tuple[str, ...]:
    return tuple("cd" if ch == "d" else "c" for ch in pattern)


@dataclass(frozen=True)
class InterleavingWeights:
    """Weight per interleaving pattern, leftmost letter first."""

    n: int
    m: int
    weights: Mapping[str, Fraction]

    def __getitem__(self, pattern: str) -> Fraction:
        return self.weights[pattern]

    def total(self) -> Fraction:
        return sum(self.weights.values(), Fraction(0))

    def scheme(self) -> MixedScheme:
        return MixedScheme({pattern_word(p): w for p, w in self.weights.items()})

    def value(self) -> OperatorPolynomial:
        """Normal form of the weighted mixture of words."""
        return normal_form(apply_scheme(self.scheme()), "ladder")


def _gap_counts(pattern: str) -> list[int]:
    """Numbers of ``d`` letters before the first, between, and after the last ``c``."""
    counts = [0]
    for ch in pattern:
        if ch == "d":
            counts[-1] += 1
        else:
            counts.append(0)
    return counts


def pattern_weight(chi: ChiPath, pattern: str) -> Fraction:
    """Probability that sorted points realize ``pattern``, latest leftmost.

    The ``c`` points are uniform on ``[0, 1]``, the ``d`` points follow
    ``d chi``.  With the ``c`` times ``u_1 > ... > u_n`` and ``k_i`` letters
    ``d`` in gap ``i``::

        n! m! / prod k_i!  int_{u_1 > ... > u_n}  prod (chi(u_i) - chi(u_{i+1}))^k_i du

    where ``chi(u_0) = 1`` and ``chi(u_{n+1}) = 0``.  The simplex integral is
    evaluated from the innermost variable outwards.
    """
    k = _gap_counts(pattern)
    n = len(k) - 1
    m = sum(k)
    if n == 0:
        return Fraction(1)
    x = chi.poly
    inner = x ** k[n]
    for i in range(n - 1, 0, -1):
        acc = PiecewisePoly.constant(0, x.breaks)
        for j in range(k[i] + 1):
            moment = (x ** j * inner).cumulative()
            acc = acc + (x ** (k[i] - j) * moment) * ((-1) ** j * comb(k[i], j))
        inner = acc
    total = ((1 - x) ** k[0] * inner).integral()
    multiplicity = factorial(n) * factorial(m)
    for ki in k:
        multiplicity //= factorial(ki)
    return total * multiplicity


def scheme_weights(chi: ChiPath, n: int, m: int, bound: int = DEFAULT_SIZE_BOUND) -> InterleavingWeights:
    """Exact weights of all interleavings of ``c^n`` and ``(c^dagger)^m``."""
    if n < 0 or m < 0:
        raise ValueError("powers must be non-negative")
    if n + m > bound:
        raise SizeError(f"n + m = {n + m} exceeds the bound {bound}")
    weights = {p: pattern_weight(chi, p) for p in patterns(n, m)}
    if sum(weights.values()) != 1:
        raise InternalConsistencyError(f"interleaving weights sum to {sum(weights.values())}")
    return InterleavingWeights(n, m, weights)


@dataclass(frozen=True)
class SchemeReport:
    s: Scalar
    weights: InterleavingWeights
    mixture: OperatorPolynomial
    expected: OperatorPolynomial

    @property
    def passed(self) -> bool:
        return self.mixture == self.expected

    def __bool__(self):
        return self.passed


def verify_scheme(chi: ChiPath, n: int, m: int, bound: int = DEFAULT_SIZE_BOUND) -> SchemeReport:
    """Compare the weighted word mixture with the closed-form s-ordered value."""
    weights = scheme_weights(chi, n, m, bound)
    s = s_of_chi(chi)
    return SchemeReport(s, weights, weights.value(), s_ordered_value(n, m, s))


# -- contraction along a path ----------------------------------------------------

def stieltjes(chi: ChiPath, f: Poly) -> Fraction:
    """``int_0^1 f d chi`` including point masses."""
    total = Fraction(0)
    for (a, b), p in zip(chi.poly.intervals(), chi.poly.pieces):
        anti = poly_antiderivative(poly_mul(f, poly_derivative(p)))
        total += poly_eval(anti, b) - poly_eval(anti, a)
    for t, mass in chi.atoms().items():
        total += mass * poly_eval(f, t)
    return total


def path_contraction(chi: ChiPath, names: tuple[str, str] = ("l", "lc")) -> Scalar:
    """Contraction of the path ordering relative to the plain exponential.

    With ``X = lambda c^dagger + lambda* c`` every pair of a ``d chi`` point
    ``sigma`` and a ``d tau`` point ``tau`` contributes
    ``(lambda lambda* / 2) (P(tau > sigma) - P(sigma > tau))``, with
    ``P(tau > sigma) = int (1 - sigma) d chi`` and
    ``P(sigma > tau) = int sigma d chi``.  The result is checked against
    ``-s lambda lambda* / 2``.
    """
    lam, lamc = Scalar.var(names[0]), Scalar.var(names[1])
    later_c = stieltjes(chi, (Fraction(1), Fraction(-1)))
    later_cd = stieltjes(chi, (Fraction(0), Fraction(1)))
    c = lam * lamc * Scalar((later_c - later_cd) / 2)
    expected = -s_of_chi(chi) * lam * lamc / Scalar(2)
    if c != expected:
        raise InternalConsistencyError(f"path contraction {c} differs from -s/2 form {expected}")
    return c
