from fractions import Fraction

import pytest
from hypothesis import given

from wickorder.errors import SymbolicResidueError, UnknownIndeterminateError
from wickorder.scalar import Gaussian, Scalar

from conftest import gaussians, symbolic_scalars


def test_gaussian_arithmetic_is_exact():
    a = Gaussian(Fraction(1, 3), Fraction(-2, 5))
    assert a * a.inverse() == Gaussian(1)
    assert (a + a.conjugate()) == Gaussian(Fraction(2, 3))
    assert Gaussian(0, 1) ** 2 == Gaussian(-1)


def test_sqrt2_is_tracked_exactly():
    r = Scalar.sqrt2()
    assert r * r == Scalar(2)
    assert (r / 2) * r == Scalar(1)
    assert not (r - Scalar(Fraction(14142, 10000))).is_zero()


@pytest.mark.parametrize(
    "value, expected",
    [
        (Scalar(3) - Scalar.sqrt2() * 2, 1),     # 3 > 2*sqrt(2)
        (Scalar(2) - Scalar.sqrt2() * 2, -1),    # 2 < 2*sqrt(2)
        (Scalar(-1) + Scalar.sqrt2(), 1),
        (Scalar(0), 0),
    ],
)
def test_sign_of_real_surd(value, expected):
    assert value.sign() == expected


def test_sign_rejects_complex():
    with pytest.raises(ValueError):
        Scalar.i().sign()


@given(symbolic_scalars(), symbolic_scalars(), symbolic_scalars())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert (a - a).is_zero()


@given(symbolic_scalars(), symbolic_scalars(), gaussians)
def test_substitution_is_a_ring_homomorphism(a, b, value):
    bind = {"s": Scalar(value)}
    assert (a * b).subs(bind, strict=False) == a.subs(bind, strict=False) * b.subs(bind, strict=False)
    assert (a + b).subs(bind, strict=False) == a.subs(bind, strict=False) + b.subs(bind, strict=False)


@given(symbolic_scalars())
def test_numeric_evaluation_matches_symbolic(a):
    bindings = {"s": 0.3 - 0.2j, "z": -1.1}
    exact = a.subs({"s": Gaussian(Fraction(3, 10), Fraction(-1, 5)), "z": Fraction(-11, 10)}, strict=False)
    assert abs(exact.to_complex() - a.to_complex(bindings)) < 1e-9


def test_strict_substitution_rejects_unknown_names():
    with pytest.raises(UnknownIndeterminateError):
        Scalar.var("s").subs({"mu": 1})


def test_numeric_value_needs_every_binding():
    with pytest.raises(SymbolicResidueError):
        (Scalar.var("s") + 1).to_complex()


def test_string_form():
    z = Scalar.var("z")
    assert str((z + 1) ** 2) == "z^2 + 2*z + 1"
    assert str(Scalar(0)) == "0"
