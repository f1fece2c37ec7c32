"""Shared strategies and the acceptance summary printed at the end of a run."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import settings, strategies as st

from wickorder.algebra import OperatorPolynomial
from wickorder.scalar import Gaussian, Scalar

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def record_criterion():
    """Store and print the one-line outcome of an acceptance criterion."""

    def record(number: int, passed: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})"
        ACCEPTANCE_LINES[number] = line
        print(line)

    return record


small_fractions = st.builds(Fraction, st.integers(-4, 4), st.integers(1, 4))
gaussians = st.builds(Gaussian, small_fractions, small_fractions)
scalars = st.builds(Scalar, gaussians)


@st.composite
def symbolic_scalars(draw, names=("s", "z")):
    """Small polynomials in a couple of indeterminates, possibly with sqrt(2)."""
    total = Scalar(0)
    for _ in range(draw(st.integers(0, 3))):
        term = Scalar(draw(gaussians))
        for name in names:
            term = term * Scalar.var(name) ** draw(st.integers(0, 2))
        if draw(st.booleans()):
            term = term * Scalar.sqrt2()
        total = total + term
    return total


@st.composite
def operator_polynomials(draw, names=("q", "p"), max_degree=4, max_terms=4, n_modes=1):
    """Sums of random words over ``names`` with small Gaussian-rational coefficients."""
    total = OperatorPolynomial()
    for _ in range(draw(st.integers(0, max_terms))):
        length = draw(st.integers(0, max_degree))
        word = [(draw(st.sampled_from(names)), draw(st.integers(1, n_modes))) for _ in range(length)]
        total = total + OperatorPolynomial.word(word, draw(gaussians))
    return total
