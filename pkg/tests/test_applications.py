import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from wickorder.applications import (
    DriveSpec,
    GaussianNormalForm,
    adaptive_simpson,
    cavity_trotter,
    cavity_unitary,
    discretized_particle_contraction,
    driven_cavity,
    fock_to_grid,
    forced_particle,
    forced_particle_wavefunction,
    normal_ordered_exp_series,
    normal_ordered_gaussian_matrix,
    parse_complex,
    particle_trotter,
    particle_unitary,
    pq_to_normal_contraction,
    pq_unravel_check,
    squeeze_generator_matrix,
    squeezer_by_unraveling,
    squeezer_closed_form_symbolic,
    squeezer_routes_agree,
    squeezing_normal_form,
    state_overlap,
    unitarity_error,
    vacuum_power_diagonal,
)
from wickorder.algebra import OperatorPolynomial
from wickorder.errors import ConvergenceError, DomainError, NumericRangeError, RestrictionError
from wickorder.fock import FockConfig, compare_block, hermite_functions
from wickorder.scalar import Gaussian, Scalar

F = Fraction
I = Scalar.i()


# -- drive input -----------------------------------------------------------------

@pytest.mark.parametrize(
    "text, expected",
    [
        ("3", Gaussian(3)),
        ("1/2-3/4i", Gaussian(F(1, 2), F(-3, 4))),
        ("0.25+i", Gaussian(F(1, 4), 1)),
        ("-i", Gaussian(0, -1)),
        ("2j", Gaussian(0, 2)),
        ("-1.5e-1", Gaussian(F(-3, 20))),
    ],
)
def test_parse_complex(text, expected):
    assert parse_complex(text) == Scalar(expected)


@pytest.mark.parametrize("text", ["", "abc", "1+", "i2", "1//2"])
def test_parse_complex_rejects(text):
    with pytest.raises(ValueError):
        parse_complex(text)


def test_drive_file_format():
    drive = DriveSpec.parse("# force\n0 1/2 1\n1/2 1 -1/2+i  # second piece\n")
    assert drive.horizon == 1
    assert drive.segments[1] == (F(1, 2), F(1), Scalar(Gaussian(F(-1, 2), 1)))
    assert drive(np.array([0.25, 0.75])).tolist() == [1, -0.5 + 1j]


@pytest.mark.parametrize(
    "segments, horizon",
    [
        ([(0, 1, 1), (F(1, 2), 2, 1)], None),   # overlapping
        ([(1, 1, 1)], None),                    # empty
        ([(0, 2, 1)], 1),                       # beyond horizon
    ],
)
def test_drive_validation(segments, horizon):
    with pytest.raises(ValueError):
        DriveSpec.piecewise(segments, horizon)


def test_simpson_integrates_smooth_functions():
    assert abs(adaptive_simpson(np.sin, 0.0, math.pi) - 2) < 1e-10


def test_simpson_reports_failure_to_converge():
    with pytest.raises(ConvergenceError):
        adaptive_simpson(lambda x: np.sign(x - 1 / 3) * np.sin(1 / (x + 1e-3)), 0.0, 1.0, tol=1e-14, max_n=1 << 10)


# -- forced particle ----------------------------------------------------------------

def test_zero_force():
    shift = forced_particle(DriveSpec.constant(0, 1))
    assert shift.momentum.is_zero() and shift.coordinate.is_zero() and shift.contraction.is_zero()
    u = particle_unitary(shift, FockConfig(10))
    assert np.allclose(u, np.eye(10))


@pytest.mark.parametrize("f0, mass, t", [(F(1, 2), 1, 1), (F(3), F(2), F(1, 3)), (F(-1, 4), F(1, 5), 2)])
def test_constant_force_closed_form(f0, mass, t):
    shift = forced_particle(DriveSpec.constant(f0, t), mass)
    assert shift.momentum == Scalar(f0 * t)
    assert shift.coordinate == Scalar(-f0 * t ** 2 / (2 * mass))
    # the double integral of max(tau, sigma) over the square is 2 t^3 / 3
    assert shift.contraction == I * Scalar(f0 ** 2 * t ** 3 / (3 * mass))


def test_discretized_contraction_converges_to_closed_form():
    drive = DriveSpec.constant(F(1, 2), 1)
    exact = forced_particle(drive).contraction
    values = [discretized_particle_contraction(drive, 1, k) for k in (2, 4, 8, 16)]
    assert values == [I * Scalar(F(5, 64)), I * Scalar(F(21, 256)), I * Scalar(F(85, 1024)),
                      I * Scalar(F(341, 4096))]
    gaps = [abs((v - exact).to_complex()) for v in values]
    assert all(g / h == pytest.approx(4) for g, h in zip(gaps, gaps[1:]))


def test_discretized_contraction_needs_segments():
    with pytest.raises(RestrictionError):
        discretized_particle_contraction(DriveSpec.sampled(np.cos, 1.0))


def test_constant_force_by_quadrature_matches_exact():
    exact = forced_particle(DriveSpec.constant(F(1, 2), 1)).numeric()
    sampled = forced_particle(DriveSpec.sampled(lambda x: 0.5 + 0 * x, 1.0)).numeric()
    assert max(abs(a - b) for a, b in zip(exact, sampled)) < 1e-12


def test_quadrature_refuses_a_jump_it_cannot_resolve():
    drive = DriveSpec.piecewise([(0, F(1, 3), 1), (F(1, 3), 1, F(-1, 2))])
    with pytest.raises(ConvergenceError):
        forced_particle(DriveSpec.sampled(drive, 1.0))


def test_smooth_force_against_analytic_integrals():
    t = 1.3
    shift = forced_particle(DriveSpec.sampled(np.sin, t), mass=2.0)
    dp, dq, c = shift.numeric()
    assert abs(dp - (1 - math.cos(t))) < 1e-10
    assert abs(dq + (math.sin(t) - t * math.cos(t)) / 2) < 1e-10
    assert abs(c.real) < 1e-14 and c.imag > 0


@pytest.mark.parametrize("drive", [DriveSpec.constant(F(1, 2), 1),
                                   DriveSpec.sampled(lambda x: 0.6 * np.cos(2 * x), 1.0)])
def test_particle_closed_form_matches_trotter_with_phase(drive):
    cfg = FockConfig(64)
    closed = particle_unitary(forced_particle(drive), cfg)
    trotter = particle_trotter(drive, cfg, steps=400)
    overlap = state_overlap(closed, trotter)
    assert abs(1 - overlap) < 1e-4


def test_half_contraction_fails_phase_sensitive_overlap():
    drive = DriveSpec.constant(F(1, 2), 1)
    cfg = FockConfig(64)
    shift = forced_particle(drive)
    halved = type(shift)(shift.momentum, shift.coordinate, shift.contraction / 2)
    overlap = state_overlap(particle_unitary(halved, cfg), particle_trotter(drive, cfg, steps=400))
    assert abs(1 - overlap) > 1e-2
    assert abs(overlap) ** 2 > 1 - 1e-4


def test_wavefunction_zero_force_is_identity():
    x = np.linspace(-8, 8, 801)
    psi = np.exp(-x ** 2 / 2) * (1 + 0.3 * x)
    out = forced_particle_wavefunction(x, psi, forced_particle(DriveSpec.constant(0, 1)))
    assert np.allclose(out, psi)


def test_wavefunction_norm_and_fock_oracle():
    x = np.linspace(-10, 10, 4001)
    dx = x[1] - x[0]
    psi0 = hermite_functions(1, x)[0]
    drive = DriveSpec.constant(F(1, 2), 1)
    psi = forced_particle_wavefunction(x, psi0, forced_particle(drive))
    assert abs(np.sum(abs(psi) ** 2) * dx - 1) < 1e-12
    cfg = FockConfig(64)
    state = particle_trotter(drive, cfg, steps=1000)[:, 0]
    grid = fock_to_grid(state, x)
    assert math.sqrt(np.sum(abs(grid - psi) ** 2) * dx) < 1e-3


def test_wavefunction_rejects_large_shift():
    x = np.linspace(-1, 1, 11)
    with pytest.raises(DomainError):
        forced_particle_wavefunction(x, np.ones(11), forced_particle(DriveSpec.constant(10, 1)))


# -- driven cavity ------------------------------------------------------------------

def test_zero_cavity_drive():
    shift = driven_cavity(DriveSpec.constant(0, 1))
    assert shift.shift_conj.is_zero() and shift.contraction.is_zero()


@pytest.mark.parametrize("e0, t", [(F(3, 10), 1), (Gaussian(F(1, 2), F(-1, 3)), F(2))])
def test_constant_cavity_drive(e0, t):
    shift = driven_cavity(DriveSpec.constant(e0, t))
    e = Scalar(e0)
    assert shift.shift_conj == e.conjugate() * Scalar(t)
    assert shift.contraction == -e * e.conjugate() * Scalar(F(t) ** 2 / 2)


def test_resonant_drive_phase_cancels():
    e0, w, t = 0.4 - 0.1j, 3.0, 1.5
    shift = driven_cavity(DriveSpec.sampled(lambda s: e0 * np.exp(-1j * w * s), t), omega=w)
    _, dcc, c = shift.numeric()
    assert abs(c + abs(e0) ** 2 * t ** 2 / 2) < 1e-9
    assert abs(dcc - np.conj(e0) * t) < 1e-9


@settings(max_examples=15)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3)), min_size=1, max_size=4),
       st.sampled_from([0, F(1, 2), 2]))
def test_cavity_contraction_has_nonpositive_real_part(values, omega):
    segs = [(F(k, 4), F(k + 1, 4), Gaussian(F(a, 4), F(b, 4))) for k, (a, b) in enumerate(values)]
    drive = DriveSpec.piecewise(segs)
    _, dcc, c = driven_cavity(drive, omega).numeric()
    assert c.real <= 1e-15
    # |exp(C)| is the vacuum persistence amplitude magnitude
    assert abs(c.real + abs(dcc) ** 2 / 2) < 1e-12


@pytest.mark.parametrize("omega", [0, F(3, 2)])
def test_cavity_closed_form_matches_trotter(omega):
    drive = DriveSpec.piecewise([(0, F(1, 2), F(3, 10)), (F(1, 2), 1, Gaussian(0, F(1, 5)))])
    cfg = FockConfig(48)
    closed = cavity_unitary(driven_cavity(drive, omega), cfg)
    trotter = cavity_trotter(drive, cfg, omega, steps=1000)
    assert compare_block(closed, trotter, cfg.dim // 2) < 1e-5


@pytest.mark.parametrize(
    "unitary, dim, keep",
    [
        (lambda cfg: particle_unitary(forced_particle(DriveSpec.constant(F(1, 2), 1)), cfg), 64, 32),
        (lambda cfg: cavity_unitary(driven_cavity(DriveSpec.constant(F(3, 10), 1)), cfg), 64, 32),
        # squeezing spreads number states far upward, so only a few levels stay inside N
        (lambda cfg: normal_ordered_gaussian_matrix(squeezing_normal_form(2), cfg), 64, 4),
        (lambda cfg: normal_ordered_gaussian_matrix(squeezing_normal_form(2), cfg), 160, 20),
    ],
    ids=["particle", "cavity", "squeezer-64", "squeezer-160"],
)
def test_closed_forms_are_unitary_on_safe_block(unitary, dim, keep):
    cfg = FockConfig(dim)
    assert unitarity_error(unitary(cfg), dim - keep, cfg) < 1e-8


# -- squeezer -----------------------------------------------------------------------

def test_unit_squeezing_is_identity():
    g = squeezing_normal_form(1)
    assert g.prefactor_squared == Scalar(1)
    assert g.alpha.is_zero() and g.beta.is_zero() and g.gamma.is_zero()
    assert np.array_equal(normal_ordered_gaussian_matrix(g, FockConfig(20)), np.eye(20))


def test_squeezing_coefficients_at_two():
    g = squeezing_normal_form(2)
    assert (g.prefactor_squared, g.alpha, g.beta, g.gamma) == (
        Scalar(F(4, 5)), Scalar(F(-3, 10)), Scalar(F(-1, 5)), Scalar(F(3, 10)))
    p, q = OperatorPolynomial.generator("p"), OperatorPolynomial.generator("q")
    expected = ((p * q).scale(3 * I) - (p * p + q * q).scale(Scalar(F(1, 2)))).scale(Scalar(F(1, 5)))
    assert g.qp_symbol_exponent() == expected


@pytest.mark.parametrize("mu", [0, -1])
def test_squeezing_rejects_nonpositive(mu):
    with pytest.raises(ValueError):
        squeezing_normal_form(mu)


@pytest.mark.parametrize("branch", ["mu>1", "mu<1"])
def test_unraveling_route_reproduces_closed_form(branch):
    assert squeezer_routes_agree(branch)


def test_unraveling_route_at_a_point():
    derived = squeezer_by_unraveling("mu>1")
    values = {k: derived[k].subs(derived["mu"], 2) for k in ("prefactor_squared", "alpha", "beta", "gamma")}
    assert values == {"prefactor_squared": sympy.Rational(4, 5), "alpha": sympy.Rational(-3, 10),
                      "beta": sympy.Rational(-1, 5), "gamma": sympy.Rational(3, 10)}


def test_closed_form_symbolic_at_one():
    closed = squeezer_closed_form_symbolic()
    at_one = {k: closed[k].subs(closed["mu"], 1) for k in ("prefactor_squared", "alpha", "beta", "gamma")}
    assert at_one == {"prefactor_squared": 1, "alpha": 0, "beta": 0, "gamma": 0}


@pytest.mark.parametrize("sign", [1, -1])
def test_pq_contraction_for_unraveling(sign):
    z, zc = Scalar.var("z"), Scalar.var("zc")
    quarter = Scalar(F(1, 4))
    assert pq_to_normal_contraction(sign) == quarter * zc * zc - quarter * z * z + Scalar(F(sign, 2)) * z * zc


@pytest.mark.parametrize("mu", [2, F(1, 2), F(3, 2), F(4, 5)])
def test_squeezer_matches_dilation_generator(mu):
    cfg = FockConfig(40)
    closed = normal_ordered_gaussian_matrix(squeezing_normal_form(mu), cfg)
    assert compare_block(closed, squeeze_generator_matrix(float(mu), cfg), 20) < 1e-8


def test_squeezed_vacuum_is_dilated_gaussian():
    mu = 2.0
    cfg = FockConfig(100)
    x = np.linspace(-8, 8, 1601)
    state = normal_ordered_gaussian_matrix(squeezing_normal_form(2), cfg)[:, 0]
    expected = math.sqrt(mu) * hermite_functions(1, mu * x)[0]
    assert np.max(np.abs(fock_to_grid(state, x) - expected)) < 1e-8


def test_vacuum_diagonal_matches_series():
    for beta in (-1, -0.2, 0.5 + 0.25j):
        series = normal_ordered_exp_series(beta, 20)
        # the alternating series loses about 1e-11 to cancellation at beta = -1
        assert np.allclose(np.diag(vacuum_power_diagonal(beta, 20)), series, atol=1e-9)
    projector = np.diag(vacuum_power_diagonal(-1, 20))
    assert projector[0, 0] == 1 and np.count_nonzero(projector) == 1


def test_identity_gaussian():
    g = GaussianNormalForm(Scalar(1), Scalar(0), Scalar(0), Scalar(0))
    assert np.array_equal(normal_ordered_gaussian_matrix(g, FockConfig(8)), np.eye(8))


def test_gaussian_overflow_reported():
    g = GaussianNormalForm(Scalar(1), Scalar(0), Scalar(10 ** 6), Scalar(0))
    with pytest.raises(NumericRangeError):
        normal_ordered_gaussian_matrix(g, FockConfig(200))


@pytest.mark.parametrize(
    "kappa, reference, tol",
    [(0.05, "series", 1e-6), (-0.25, "series", 1e-6), (0.5, "squeezer", 1e-5)],
)
def test_pq_unravel_quadrature(kappa, reference, tol):
    report = pq_unravel_check(kappa, FockConfig(24), reference=reference)
    assert report.error < tol
    assert report.converged


def test_pq_unravel_rejects_bad_kappa():
    with pytest.raises(ValueError):
        pq_unravel_check(0, FockConfig(8))
    with pytest.raises(ValueError):
        pq_unravel_check(1.5, FockConfig(8))
