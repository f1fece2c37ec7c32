"""Contractions between orderings and exact checks of the Wick relation.

For two orderings ``O1`` and ``O2`` of the same linear operator ``X``::

    O1 exp(X) = exp(C) O2 exp(X),     C = (O1 X^2 - O2 X^2) / 2

with ``C`` a c-number.  This module computes ``C`` by two independent
routes, verifies the relation order by order in exact arithmetic and
replays the swap-by-swap construction on a discretized factor string.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Mapping

from .algebra import (
    LinearCombination,
    OperatorPolynomial,
    commutator_scalar,
    exponent_poly_product,
    normal_form,
)
from .errors import (
    InternalConsistencyError,
    MismatchError,
    OrderingUndefinedError,
    RestrictionError,
)
from .orderings import (
    Decomposition,
    OrderedCollection,
    apply_monomial,
    decompose,
    ordered_exp_components,
)
from .scalar import ONE, ZERO, Gaussian, Scalar, ScalarLike


@dataclass(frozen=True)
class Ordering:
    """An ordered collection together with the decomposition of ``X`` over it."""

    collection: OrderedCollection
    decomposition: Decomposition

    def __post_init__(self):
        if self.decomposition.collection is not self.collection:
            Decomposition(self.collection, dict(self.decomposition), self.decomposition.x)

    @property
    def x(self) -> LinearCombination:
        return self.decomposition.x

    @classmethod
    def of(cls, collection: OrderedCollection, x: LinearCombination,
           policy: str = "collapse-duplicates",
           coefficients: Mapping[str, ScalarLike] | None = None) -> "Ordering":
        """Decompose ``x`` over ``collection`` and bundle the result."""
        if coefficients is not None:
            policy = "user-supplied"
        return cls(collection, decompose(x, collection, policy, coefficients))


def _same_x(o1: Ordering, o2: Ordering) -> None:
    if o1.x != o2.x:
        raise MismatchError(f"orderings act on different operators: {o1.x} vs {o2.x}")


def _basis(o1: Ordering, o2: Ordering) -> str:
    return o1.collection.basis if o1.collection.basis == o2.collection.basis else "ladder"


def ordered_square(o: Ordering, basis: str | None = None) -> OperatorPolynomial:
    """Normal form of ``O X^2 = sum_{a,b} lambda_a lambda_b O(A_a A_b)``."""
    coll, lam = o.collection, o.decomposition
    labels = [lab for lab in coll.labels if lam[lab]]
    out = OperatorPolynomial()
    for a, b in product(labels, repeat=2):
        out = out + apply_monomial(coll, (a, b), basis).scale(lam[a] * lam[b])
    return normal_form(out, basis)


def bilinear_contraction(o: Ordering) -> Scalar:
    """``1/2 sum_{a later than b} lambda_a lambda_b [A_a, A_b]``.

    This is the contraction of ``o`` relative to the plain exponential.
    """
    coll, lam = o.collection, o.decomposition
    labels = [lab for lab in coll.labels if lam[lab]]
    total = ZERO
    for i, a in enumerate(labels):
        for b in labels[i + 1:]:
            comm = commutator_scalar(coll.operator(a), coll.operator(b))
            if not comm:
                continue
            later = coll.later(a, b)
            if later is None:
                raise OrderingUndefinedError(f"labels {a!r} and {b!r} are unordered but do not commute")
            term = lam[a] * lam[b] * comm
            total = total + (term if later else -term)
    return total / Scalar(2)


def general_contraction(o1: Ordering, o2: Ordering, basis: str | None = None) -> Scalar:
    """The c-number ``C`` with ``O1 exp(X) = exp(C) O2 exp(X)``.

    Computed from the difference of ordered squares and checked against the
    bilinear commutator sum; disagreement raises
    :class:`InternalConsistencyError`.
    """
    _same_x(o1, o2)
    basis = basis or _basis(o1, o2)
    diff = ordered_square(o1, basis) - ordered_square(o2, basis)
    if not diff.is_scalar():
        raise InternalConsistencyError(f"ordered squares differ by an operator: {diff}")
    c = diff.scalar_part() / Scalar(2)
    check = bilinear_contraction(o1) - bilinear_contraction(o2)
    if c != check:
        raise InternalConsistencyError(f"contraction routes disagree: {c} vs {check}")
    return c


def contraction_matrix(c1: OrderedCollection, c2: OrderedCollection,
                       basis: str | None = None) -> dict[tuple[str, str], Scalar]:
    """``C_ab`` = c-number part of ``(O1 - O2)(A_a A_b)``, symmetric in ``a, b``.

    With ``X = sum lambda_a A_a`` the contraction is
    ``1/2 sum_{a,b} C_ab lambda_a lambda_b``.
    """
    if c1.labels != c2.labels and set(c1.labels) != set(c2.labels):
        raise MismatchError("collections carry different label sets")
    for lab in c1.labels:
        if c1.operator(lab) != c2.operator(lab):
            raise MismatchError(f"label {lab!r} names different operators")
    basis = basis or (c1.basis if c1.basis == c2.basis else "ladder")
    out = {}
    labels = c1.labels
    for i, a in enumerate(labels):
        out[(a, a)] = ZERO
        for b in labels[i + 1:]:
            diff = normal_form(apply_monomial(c1, (a, b), basis) - apply_monomial(c2, (a, b), basis), basis)
            if not diff.is_scalar():
                raise InternalConsistencyError(f"orderings of {a}, {b} differ by an operator: {diff}")
            out[(a, b)] = out[(b, a)] = diff.scalar_part()
    return out


@dataclass(frozen=True)
class ContractionReport:
    """Outcome of an exact order-by-order check of the Wick relation."""

    contraction: Scalar
    max_degree: int
    degrees: tuple[tuple[int, bool], ...]

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.degrees)

    @property
    def first_failure(self) -> int | None:
        return next((d for d, ok in self.degrees if not ok), None)

    def __str__(self):
        status = "pass" if self.passed else f"FAIL at degree {self.first_failure}"
        return f"C = {self.contraction}; degrees 0..{self.max_degree}: {status}"


def _as_scalar_dict(d: Mapping) -> dict:
    return {k: Scalar.coerce(v) for k, v in d.items() if v}


def gwt_verify(o1: Ordering, o2: Ordering, degree: int = 6, basis: str | None = None) -> ContractionReport:
    """Check ``O1 exp(X) = exp(C) O2 exp(X)`` through total degree ``degree``.

    ``C`` is quadratic in the coefficients of ``X``, so the degree-``d``
    part of the right side collects ``C^j / j!`` times the degree
    ``d - 2j`` part of ``O2 exp(X)``.
    """
    if degree < 1:
        raise ValueError("degree must be at least 1")
    _same_x(o1, o2)
    basis = basis or _basis(o1, o2)
    c = general_contraction(o1, o2, basis)
    lhs = ordered_exp_components(o1.collection, o1.decomposition, degree, basis)
    rhs_parts = ordered_exp_components(o2.collection, o2.decomposition, degree, basis)
    n = o1.collection.n_modes
    zero = (0,) * (2 * n)
    powers = [ONE]
    for j in range(1, degree // 2 + 1):
        powers.append(powers[-1] * c / Scalar(j))
    status = []
    for d in range(degree + 1):
        rhs: dict = {}
        for j in range(d // 2 + 1):
            if not powers[j]:
                continue
            part = exponent_poly_product({zero: powers[j]}, rhs_parts[d - 2 * j], basis)
            for e, v in part.items():
                rhs[e] = Scalar.coerce(rhs.get(e, ZERO)) + Scalar.coerce(v)
        status.append((d, _as_scalar_dict(lhs[d]) == _as_scalar_dict(rhs)))
    return ContractionReport(c, degree, tuple(status))


# -- swap replay -----------------------------------------------------------------

def _floor(x: Scalar, what: str) -> int:
    if not x.is_gaussian():
        raise RestrictionError(f"{what} must be a rational number, got {x}")
    g = x.as_gaussian()
    if g.im or g.re < 0:
        raise RestrictionError(f"{what} must be real and non-negative, got {x}")
    return int(g.re // 1)


def _unit_commutator(n_modes: int, left: int, right: int) -> Scalar:
    """``[x_left, x_right]`` for canonical generators indexed q_1..q_n, p_1..p_n."""
    if left % n_modes != right % n_modes or left == right:
        return ZERO
    return Scalar.i() if left < right else -Scalar.i()


def _bubble(keys: list) -> list[tuple[int, int]]:
    """Adjacent swaps of left-to-right passes; returns positions swapped."""
    keys = list(keys)
    swaps = []
    changed = True
    while changed:
        changed = False
        for i in range(len(keys) - 1):
            if keys[i] > keys[i + 1]:
                swaps.append((keys[i], keys[i + 1]))
                keys[i], keys[i + 1] = keys[i + 1], keys[i]
                changed = True
    return swaps


def _insertion(keys: list) -> list[tuple[int, int]]:
    keys = list(keys)
    swaps = []
    for i in range(1, len(keys)):
        j = i
        while j > 0 and keys[j - 1] > keys[j]:
            swaps.append((keys[j - 1], keys[j]))
            keys[j - 1], keys[j] = keys[j], keys[j - 1]
            j -= 1
    return swaps


SWAP_STRATEGIES = {"bubble": _bubble, "insertion": _insertion}


def swap_replay(source: OrderedCollection, target: OrderedCollection, decomposition: Mapping[str, ScalarLike],
                eps, strategy: str = "bubble") -> Scalar:
    """Accumulated exponent turning the ``source`` factor string into ``target``.

    Each label contributes ``floor(lambda_a A_ak / eps)`` factors
    ``exp(eps x_k)``.  Every adjacent exchange
    ``exp(eps x_k) exp(eps x_l) -> exp(eps x_l) exp(eps x_k)`` adds
    ``eps^2 [x_l, x_k]`` to the exponent, so that
    ``target-string = exp(result) source-string``.  The result approaches
    ``general_contraction(target, source)`` as ``eps`` shrinks.
    """
    if strategy not in SWAP_STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {tuple(SWAP_STRATEGIES)}")
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if set(source.labels) != set(target.labels):
        raise MismatchError("collections carry different label sets")
    for lab in source.labels:
        if source.operator(lab) != target.operator(lab):
            raise MismatchError(f"label {lab!r} names different operators")
    n = source.n_modes
    lam = {lab: Scalar.coerce(decomposition.get(lab, 0)) for lab in source.labels}
    blocks: dict[str, list[int]] = {}
    inv_eps = Scalar(1 / eps)
    for lab in source.labels:
        _floor(lam[lab], f"coefficient of {lab!r}")
        block = []
        for k, a in enumerate(source.operator(lab).coefficients):
            block += [k] * _floor(lam[lab] * a * inv_eps, f"component {k} of {lab!r}")
        blocks[lab] = block
    active = [lab for lab in source.labels if blocks[lab]]
    src_order = source.arrange(active)
    tgt_order = target.arrange(active)
    # each factor is identified by (label, position in its block); sort keys
    # are positions in the target string
    tgt_pos = {}
    for lab in tgt_order:
        for j in range(len(blocks[lab])):
            tgt_pos[(lab, j)] = len(tgt_pos)
    keys = [tgt_pos[(lab, j)] for lab in src_order for j in range(len(blocks[lab]))]
    generator_at = {tgt_pos[(lab, j)]: blocks[lab][j] for lab in tgt_order for j in range(len(blocks[lab]))}
    total = ZERO
    counts: dict[tuple[int, int], int] = {}
    for left, right in SWAP_STRATEGIES[strategy](keys):
        pair = (generator_at[right], generator_at[left])
        counts[pair] = counts.get(pair, 0) + 1
    for (l, k), m in counts.items():
        total = total + _unit_commutator(n, l, k) * Scalar(m)
    return total * Scalar(eps * eps)


def ordered_exp_matrix(o: Ordering, cfg, bindings: Mapping[str, complex] | None = None):
    """Truncated Fock matrix of the ordered exponential, one factor per label."""
    import numpy as np

    from .fock import matexp, represent

    coll, lam = o.collection, o.decomposition
    out = np.eye(cfg.size, dtype=complex)
    for lab in coll.arrange([lab for lab in coll.labels if lam[lab]]):
        gen = coll.operator(lab).to_poly().scale(lam[lab])
        out = out @ matexp(represent(gen, cfg, bindings))
    return out


def gwt_numeric_check(o1: Ordering, o2: Ordering, cfg, bindings: Mapping[str, complex] | None = None,
                      margin: int | None = None) -> float:
    """Safe-block error between ``O1 exp(X)`` and ``exp(C) O2 exp(X)`` as matrices.

    The exponentials are not polynomials, so the default margin is half the
    truncation dimension.
    """
    import numpy as np

    from .fock import compare_block

    c = general_contraction(o1, o2).to_complex(bindings)
    lhs = ordered_exp_matrix(o1, cfg, bindings)
    rhs = np.exp(c) * ordered_exp_matrix(o2, cfg, bindings)
    return compare_block(lhs, rhs, cfg.dim // 2 if margin is None else margin, cfg)
