"""Monomial orderings of labeled operator collections and weighted schemes.

A collection assigns to every label an operator (a linear combination of
canonical generators) and an optional rational *rank*.  Higher rank means
"later", and later factors are written to the left::

    O(A_a1 A_a2 ... A_an) = A_an ... A_a2 A_a1      for a_n > ... > a1

Labels sharing a rank, or carrying no rank at all, are unordered; that is
only admissible when their operators commute.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from math import factorial
from typing import Iterable, Mapping, Sequence

from .algebra import (
    LADDER,
    QP,
    LinearCombination,
    OperatorPolynomial,
    commutator_scalar,
    exponent_poly_product,
    from_exponent_poly,
    normal_form,
    to_exponent_poly,
)
from .errors import AmbiguityError, InvariantError, OrderingUndefinedError, SpanError
from .scalar import ONE, ONE_G, ZERO, Gaussian, Scalar, ScalarLike


def _rank(r) -> Fraction | None:
    if r is None:
        return None
    if isinstance(r, float):
        raise TypeError("ranks must be exact rationals, not floats")
    return Fraction(r)


@dataclass(frozen=True)
class Entry:
    label: str
    operator: LinearCombination
    rank: Fraction | None


class OrderedCollection:
    """Labeled operators ``{A_alpha}`` with a (partial) order on the labels.

    Parameters
    ----------
    entries
        ``(label, operator, rank)`` triples.  ``rank`` is a rational "time";
        ``None`` leaves the label unordered.
    """

    def __init__(self, entries: Iterable[tuple[str, LinearCombination, object]]):
        built = []
        seen = set()
        for label, op, rank in entries:
            if label in seen:
                raise ValueError(f"duplicate label {label!r}")
            seen.add(label)
            if not isinstance(op, LinearCombination):
                raise TypeError(f"operator for {label!r} must be a LinearCombination")
            built.append(Entry(label, op, _rank(rank)))
        if not built:
            raise ValueError("a collection needs at least one operator")
        n = built[0].operator.n_modes
        for e in built:
            e.operator._check(built[0].operator)
        self.entries = tuple(built)
        self.n_modes = n
        self._by_label = {e.label: e for e in built}
        for i, a in enumerate(built):
            for b in built[i + 1:]:
                if a.rank is not None and a.rank == b.rank and commutator_scalar(a.operator, b.operator):
                    raise OrderingUndefinedError(
                        f"labels {a.label!r} and {b.label!r} share rank {a.rank} but do not commute"
                    )

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(e.label for e in self.entries)

    @property
    def basis(self) -> str:
        return LADDER if any(e.operator.ladder for e in self.entries) else QP

    def operator(self, label: str) -> LinearCombination:
        return self._by_label[label].operator

    def rank(self, label: str) -> Fraction | None:
        return self._by_label[label].rank

    def __contains__(self, label):
        return label in self._by_label

    def later(self, a: str, b: str) -> bool | None:
        """``True`` if ``a`` follows ``b``, ``False`` if it precedes, ``None`` if unordered."""
        ra, rb = self.rank(a), self.rank(b)
        if ra is None or rb is None or ra == rb:
            return None
        return ra > rb

    def with_ranks(self, ranks: Mapping[str, object]) -> "OrderedCollection":
        return OrderedCollection((e.label, e.operator, ranks.get(e.label, e.rank)) for e in self.entries)

    def arrange(self, factors: Sequence[str]) -> list[str]:
        """Labels of ``factors`` left to right as the ordering writes them."""
        for f in factors:
            if f not in self._by_label:
                raise KeyError(f"label {f!r} not in collection")
        ranked = [f for f in factors if self.rank(f) is not None]
        free = [f for f in factors if self.rank(f) is None]
        distinct = set(factors)
        for f in set(free):
            for g in distinct - {f}:
                if commutator_scalar(self.operator(f), self.operator(g)):
                    raise OrderingUndefinedError(
                        f"unordered label {f!r} does not commute with {g!r}"
                    )
        ranked.sort(key=self.rank, reverse=True)
        return ranked + free

    def __repr__(self):
        inner = ", ".join(f"{e.label}@{e.rank}" for e in self.entries)
        return f"OrderedCollection({inner})"


class Decomposition(Mapping):
    """Coefficients ``lambda_alpha`` with ``sum_alpha lambda_alpha A_alpha == X``."""

    def __init__(self, collection: OrderedCollection, coefficients: Mapping[str, ScalarLike],
                 x: LinearCombination | None = None):
        unknown = set(coefficients) - set(collection.labels)
        if unknown:
            raise KeyError(f"labels {sorted(unknown)} not in collection")
        self.collection = collection
        self._coeffs = {lab: Scalar.coerce(coefficients.get(lab, 0)) for lab in collection.labels}
        total = LinearCombination.zero(collection.n_modes)
        for lab, lam in self._coeffs.items():
            if lam:
                total = total + collection.operator(lab) * lam
        total.ladder = collection.basis == LADDER
        if x is not None and total != x:
            raise InvariantError(f"decomposition sums to {total}, not {x}")
        self.x = x if x is not None else total

    def __getitem__(self, label):
        return self._coeffs[label]

    def __iter__(self):
        return iter(self._coeffs)

    def __len__(self):
        return len(self._coeffs)

    def __repr__(self):
        inner = ", ".join(f"{k}: {v}" for k, v in self._coeffs.items())
        return f"Decomposition({{{inner}}})"


POLICIES = ("exact-unique", "collapse-duplicates", "user-supplied")


def decompose(x: LinearCombination, collection: OrderedCollection, policy: str = "user-supplied",
              coefficients: Mapping[str, ScalarLike] | None = None) -> Decomposition:
    """Write ``x`` as a combination of the collection's operators.

    ``exact-unique`` fails on any freedom left in the solution;
    ``collapse-duplicates`` gives identical operators equal shares of one
    coefficient; ``user-supplied`` only checks ``coefficients``.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    x._check(collection.operator(collection.labels[0]))
    if policy == "user-supplied":
        if coefficients is None:
            raise ValueError("user-supplied policy needs explicit coefficients")
        return Decomposition(collection, coefficients, x)

    if policy == "collapse-duplicates":
        groups: dict[LinearCombination, list[str]] = {}
        for lab in collection.labels:
            groups.setdefault(collection.operator(lab), []).append(lab)
        columns = list(groups.items())
    else:
        columns = [(collection.operator(lab), [lab]) for lab in collection.labels]
    solution, free = _solve([op.coefficients for op, _ in columns], list(x.coefficients))
    if free:
        raise AmbiguityError(
            f"decomposition of {x} is not unique ({free} free parameter(s)); supply coefficients"
        )
    coeffs = {}
    for (op, labs), lam in zip(columns, solution):
        share = lam / Scalar(len(labs))
        for lab in labs:
            coeffs[lab] = share
    return Decomposition(collection, coeffs, x)


def _solve(columns: list, rhs: list) -> tuple[list[Scalar], int]:
    """Row-reduce ``[columns | rhs]``; return a particular solution and nullity."""
    rows, cols = len(rhs), len(columns)
    m = [[Scalar.coerce(columns[j][i]) for j in range(cols)] + [Scalar.coerce(rhs[i])] for i in range(rows)]
    pivots = []
    r = 0
    for col in range(cols):
        piv = next((i for i in range(r, rows) if m[i][col]), None)
        if piv is None:
            continue
        if not m[piv][col].is_constant():
            raise ValueError("collection operators must have constant coefficients")
        m[r], m[piv] = m[piv], m[r]
        inv = m[r][col].inverse()
        m[r] = [v * inv for v in m[r]]
        for i in range(rows):
            if i != r and m[i][col]:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if m[i][cols]:
            raise SpanError("operator lies outside the span of the collection")
    sol = [ZERO] * cols
    for i, col in enumerate(pivots):
        sol[col] = m[i][cols]
    return sol, cols - len(pivots)


def apply_monomial(collection: OrderedCollection, factors: Sequence[str], basis: str | None = None) -> OperatorPolynomial:
    """The ordered product of the factors (a multiset of labels), unreduced."""
    basis = basis or collection.basis
    out = OperatorPolynomial.identity()
    for lab in collection.arrange(list(factors)):
        out = out * collection.operator(lab).to_poly(basis)
    return out


class MixedScheme:
    """Weighted mixture of arrangements of one multiset of factors.

    ``weights`` maps arrangements (tuples of factor symbols, leftmost first)
    to weights.  ``operators`` maps each symbol to its operator; when omitted
    the symbols are read as generator names (``q``, ``p``, ``c``, ``cd``,
    optionally followed by a mode number).
    """

    def __init__(self, weights: Mapping[tuple, ScalarLike],
                 operators: Mapping[str, object] | None = None):
        if not weights:
            raise InvariantError("a scheme needs at least one arrangement")
        self.weights = {tuple(k): Scalar.coerce(v) for k, v in weights.items()}
        patterns = {tuple(sorted(Counter(k).items())) for k in self.weights}
        if len(patterns) != 1:
            raise InvariantError("all arrangements of a scheme must permute the same factors")
        self.pattern = tuple(sorted(next(iter(self.weights))))
        symbols = set(self.pattern)
        ops = dict(operators or {})
        for s in symbols - ops.keys():
            ops[s] = _generator_symbol(s)
        self.operators = {}
        for s in symbols:
            op = ops[s]
            self.operators[s] = op.to_poly() if isinstance(op, LinearCombination) else op

    def total_weight(self) -> Scalar:
        total = ZERO
        for w in self.weights.values():
            total = total + w
        return total

    def validate(self) -> None:
        if self.total_weight() != ONE:
            raise InvariantError(f"scheme weights sum to {self.total_weight()}, not 1")

    def check_nonnegative(self, grid: Mapping[str, Iterable] | None = None) -> bool:
        """All weights real and >= 0 at every point of the parameter grid."""
        grid = grid or {}
        names = sorted(grid)
        for point in product(*(list(grid[n]) for n in names)):
            binding = dict(zip(names, point))
            for w in self.weights.values():
                v = w.subs({k: b for k, b in binding.items() if k in w.variables}, strict=False)
                if v.variables or not v.is_real_nonnegative():
                    return False
        return True


def _generator_symbol(s: str) -> OperatorPolynomial:
    name = s.rstrip("0123456789")
    mode = int(s[len(name):] or 1)
    return OperatorPolynomial.generator(name, mode)


def apply_scheme(scheme: MixedScheme) -> OperatorPolynomial:
    """``sum_P w_P [word]_P`` as an unreduced polynomial."""
    scheme.validate()
    out = OperatorPolynomial()
    for arrangement, w in scheme.weights.items():
        term = OperatorPolynomial.identity()
        for s in arrangement:
            term = term * scheme.operators[s]
        out = out + term.scale(w)
    return out


def distinct_arrangements(word: Sequence[str]) -> list[tuple]:
    return sorted(set(permutations(word)))


def weyl_scheme(word: Sequence[str], operators: Mapping[str, object] | None = None) -> MixedScheme:
    """Uniform weight over the distinct arrangements of ``word``."""
    arrangements = distinct_arrangements(word)
    w = Scalar(Fraction(1, len(arrangements)))
    return MixedScheme({a: w for a in arrangements}, operators)


def multiset_permutation_count(word: Sequence[str]) -> int:
    n = factorial(len(word))
    for c in Counter(word).values():
        n //= factorial(c)
    return n


def generator_label(name: str, mode: int, n_modes: int) -> str:
    return name if n_modes == 1 else f"{name}{mode}"


_MONOMIAL_BUILTINS = {
    # name: (species, rank) pairs; higher rank is written further left
    "normal": (("cd", 1), ("c", 0)),
    "antinormal": (("c", 1), ("cd", 0)),
    "qp": (("q", 1), ("p", 0)),
    "pq": (("p", 1), ("q", 0)),
}
BUILTIN_NAMES = tuple(_MONOMIAL_BUILTINS) + ("weyl-scheme",)


def builtin_ordering(name: str, n_modes: int = 1, word: Sequence[str] | None = None):
    """Ready-made orderings.

    ``normal``, ``antinormal``, ``qp`` and ``pq`` return an
    :class:`OrderedCollection` of the two generators of every mode;
    ``weyl-scheme`` returns the uniform :class:`MixedScheme` over ``word``.
    """
    if name == "weyl-scheme":
        if word is None:
            raise ValueError("weyl-scheme needs the word to symmetrize")
        return weyl_scheme(word)
    if name not in _MONOMIAL_BUILTINS:
        raise ValueError(f"unknown ordering {name!r}; expected one of {BUILTIN_NAMES}")
    entries = []
    for k in range(1, n_modes + 1):
        for species, rank in _MONOMIAL_BUILTINS[name]:
            entries.append((generator_label(species, k, n_modes),
                            LinearCombination.generator(species, k, n_modes), rank))
    return OrderedCollection(entries)


def order_word(name: str, word: Sequence[str], n_modes: int = 1) -> OperatorPolynomial:
    """Apply a built-in ordering to a multiset of generator labels."""
    coll = builtin_ordering(name, n_modes)
    return apply_monomial(coll, word)


# -- ordered exponentials --------------------------------------------------------

def ordered_exp_components(collection: OrderedCollection, decomposition: Mapping[str, ScalarLike],
                           degree: int, basis: str | None = None) -> list[dict]:
    """Degree-graded pieces of the ordered exponential, each in normal form.

    Entry ``d`` holds the normal form of all unreduced words of length ``d``
    in the product of per-label exponential series, keyed by exponent tuples.
    """
    if degree < 0:
        raise ValueError("truncation degree must be non-negative")
    basis = basis or collection.basis
    n = collection.n_modes
    zero = (0,) * (2 * n)
    active = [lab for lab in collection.labels if Scalar.coerce(decomposition[lab])]
    comps: list[dict] = [{zero: ONE_G}] + [{} for _ in range(degree)]
    for lab in collection.arrange(active):
        generator = collection.operator(lab).to_poly(basis).scale(decomposition[lab])
        linear = to_exponent_poly(generator, n, basis)
        series = [{zero: ONE_G}]
        for j in range(1, degree + 1):
            inv = Gaussian(Fraction(1, j))
            series.append({e: c * inv for e, c in exponent_poly_product(series[-1], linear, basis).items()})
        new = [dict() for _ in range(degree + 1)]
        for d in range(degree + 1):
            for j in range(d + 1):
                if not comps[d - j] or not series[j]:
                    continue
                if j == 0:
                    part = comps[d]
                elif d == j:
                    part = series[j]
                else:
                    part = exponent_poly_product(comps[d - j], series[j], basis)
                _merge(new[d], part)
        comps = new
    return comps


def _merge(acc: dict, part: Mapping) -> None:
    for e, c in part.items():
        v = acc.get(e)
        if v is None:
            acc[e] = c
        else:
            v = v + c
            if v:
                acc[e] = v
            else:
                del acc[e]


def ordered_exp_taylor(collection: OrderedCollection, decomposition: Mapping[str, ScalarLike],
                       degree: int, basis: str | None = None) -> OperatorPolynomial:
    """Product of per-label exponentials, latest leftmost, truncated at total word degree."""
    basis = basis or collection.basis
    total: dict = {}
    for part in ordered_exp_components(collection, decomposition, degree, basis):
        _merge(total, part)
    return from_exponent_poly(total, basis)


def ordered_power(collection: OrderedCollection, decomposition: Mapping[str, ScalarLike], n: int,
                  basis: str | None = None) -> OperatorPolynomial:
    """``O X^n`` by expanding the product over the label multiset directly."""
    basis = basis or collection.basis
    labels = [lab for lab in collection.labels if Scalar.coerce(decomposition[lab])]
    out = OperatorPolynomial()
    for combo in product(labels, repeat=n):
        coeff = ONE
        for lab in combo:
            coeff = coeff * Scalar.coerce(decomposition[lab])
        out = out + apply_monomial(collection, combo, basis).scale(coeff)
    return normal_form(out, basis)
