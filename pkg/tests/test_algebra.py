import numpy as np
import pytest
from hypothesis import given, strategies as st

from wickorder.algebra import (
    LinearCombination,
    OperatorPolynomial,
    commutator_scalar,
    normal_form,
    normal_product,
)
from wickorder.errors import DimensionError, UnknownIndeterminateError
from wickorder.fock import FockConfig, compare_block, represent
from wickorder.scalar import Scalar

from conftest import gaussians, operator_polynomials

q, p, c, cd = (OperatorPolynomial.generator(n) for n in ("q", "p", "c", "cd"))
I = Scalar.i()


@pytest.mark.parametrize(
    "expr, expected",
    [
        (c * cd, cd * c + 1),
        (p * q * q, q * q * p - q.scale(2 * I)),
        (q * p * q, q * q * p - q.scale(I)),
        (c * c * cd, cd * c * c + c.scale(2)),
        (p * q - q * p, OperatorPolynomial.scalar(-I)),
    ],
)
def test_normal_form_examples(expr, expected):
    assert normal_form(expr) == expected


def test_products_stay_unreduced():
    prod = (q + p) * (q - p)
    assert prod == q * q - q * p + p * q - p * p
    assert len(prod) == 4


def test_zero_and_identity_printing():
    assert str(OperatorPolynomial()) == "0"
    assert str(OperatorPolynomial.identity()) == "1"
    assert OperatorPolynomial.word([]) == OperatorPolynomial.identity()


@pytest.mark.parametrize(
    "bindings, poly, expected",
    [
        ({"s": 1}, c.scale(1 - Scalar.var("s")), OperatorPolynomial()),
        ({"l": Scalar(1) / 2}, (cd * c).scale(Scalar.var("l") ** 2), (cd * c).scale(Scalar(1) / 4)),
    ],
)
def test_substitute(bindings, poly, expected):
    assert poly.substitute(bindings) == expected


def test_substitute_rejects_undeclared_name():
    with pytest.raises(UnknownIndeterminateError):
        c.scale(Scalar.var("s")).substitute({"mu": 2})


@pytest.mark.parametrize(
    "x, y, expected",
    [
        (LinearCombination.generator("q"), LinearCombination.generator("p"), I),
        (LinearCombination.from_qp([2], [3]), LinearCombination.from_qp([2], [3]), Scalar(0)),
        (LinearCombination.from_qp([2], [3]), LinearCombination.from_qp([1], [-1]), -5 * I),
        (LinearCombination.generator("c"), LinearCombination.generator("cd"), Scalar(1)),
    ],
)
def test_commutator_scalar_examples(x, y, expected):
    assert commutator_scalar(x, y) == expected


def test_commutator_rejects_mixed_mode_counts():
    with pytest.raises(DimensionError):
        commutator_scalar(LinearCombination.generator("q", 1, 1), LinearCombination.generator("q", 1, 2))


def test_multimode_generators_commute_across_modes():
    q1, p2 = OperatorPolynomial.generator("q", 1), OperatorPolynomial.generator("p", 2)
    assert normal_form(p2 * q1) == q1 * p2
    c1, cd2 = OperatorPolynomial.generator("c", 1), OperatorPolynomial.generator("cd", 2)
    assert not normal_form(c1 * cd2 - cd2 * c1)


def test_basis_conversion_is_lossless():
    number = normal_form(cd * c, "qp")
    assert number == (q * q + p * p - 1).scale(Scalar(1) / 2)
    assert normal_form(number, "ladder") == cd * c


ladder_polys = operator_polynomials(names=("c", "cd"))
qp_polys = operator_polynomials(names=("q", "p"))
mixed_polys = operator_polynomials(names=("q", "p", "c", "cd"), max_degree=3)
two_mode_polys = operator_polynomials(names=("c", "cd"), max_degree=3, n_modes=2)


@given(st.one_of(ladder_polys, qp_polys, mixed_polys, two_mode_polys))
def test_normal_form_idempotent(a):
    nf = normal_form(a)
    assert normal_form(nf) == nf


@given(st.one_of(ladder_polys, qp_polys), st.one_of(ladder_polys, qp_polys))
def test_normal_form_confluent_under_multiplication(a, b):
    basis = "ladder" if (a + b).uses_ladder() else "qp"
    assert normal_form(a * b, basis) == normal_form(normal_form(a, basis) * normal_form(b, basis), basis)


@given(st.one_of(ladder_polys, two_mode_polys), st.one_of(ladder_polys, two_mode_polys))
def test_closed_form_product_matches_bubble_sort(a, b):
    assert normal_product(normal_form(a, "ladder"), normal_form(b, "ladder"), "ladder") == \
        normal_form(a * b, "ladder")


@given(qp_polys, qp_polys)
def test_closed_form_product_matches_bubble_sort_qp(a, b):
    assert normal_product(normal_form(a, "qp"), normal_form(b, "qp"), "qp") == normal_form(a * b, "qp")


@given(st.one_of(ladder_polys, qp_polys, mixed_polys), st.one_of(ladder_polys, qp_polys),
       st.one_of(ladder_polys, qp_polys))
def test_multiplication_associative_and_distributive(a, b, d):
    assert (a * b) * d == a * (b * d)
    assert a * (b + d) == a * b + a * d


@given(st.one_of(ladder_polys, qp_polys, mixed_polys))
def test_normal_form_agrees_with_fock_matrices(a):
    cfg = FockConfig(14)
    err = compare_block(represent(a, cfg), represent(normal_form(a), cfg), margin=4)
    assert err < 1e-9


@given(st.lists(gaussians, min_size=4, max_size=4), st.lists(gaussians, min_size=4, max_size=4))
def test_commutator_scalar_equals_normal_form_of_commutator(u, v):
    x = LinearCombination(u)
    y = LinearCombination(v)
    xp, yp = x.to_poly(), y.to_poly()
    diff = normal_form(xp * yp - yp * xp, "qp")
    assert diff.is_scalar()
    assert diff.scalar_part() == commutator_scalar(x, y)
    assert commutator_scalar(x, y) == -commutator_scalar(y, x)


def test_ladder_linear_combination_round_trip():
    z, zc = Scalar.var("z"), Scalar.var("zc")
    x = LinearCombination.from_ladder([zc], [z])
    assert LinearCombination.from_poly(x.to_poly("qp")) == x
    assert normal_form(x.to_poly("qp"), "ladder") == cd.scale(z) + c.scale(zc)
