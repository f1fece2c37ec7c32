"""Worked examples: a driven free particle, a driven cavity mode and a squeezer.

Each example has a closed form obtained by reordering an exponential of
linear operators and a numeric cross-check in truncated Fock space.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .algebra import LinearCombination
from .errors import ConvergenceError, DomainError, NumericRangeError, RestrictionError
from .fock import FockConfig, annihilator, compare_block, discretize, matexp, trotter_ordered_exp
from .gwt import Ordering, general_contraction
from .orderings import builtin_ordering
from .scalar import I, ONE, ZERO, Gaussian, Scalar, rational

# -- drives ----------------------------------------------------------------------


_COMPLEX = re.compile(
    r"^\s*(?P<re>[+-]?\d+(?:/\d+|\.\d*)?(?:[eE][+-]?\d+)?)?\s*"
    r"(?:(?P<sign>[+-])\s*(?P<im>\d+(?:/\d+|\.\d*)?(?:[eE][+-]?\d+)?)?\s*[ij])?\s*$"
)


_IMAGINARY = re.compile(r"^([+-]?)(\d+(?:/\d+|\.\d*)?(?:[eE][+-]?\d+)?)?\*?[ij]$")


def parse_complex(text: str) -> Scalar:
    """Read ``a``, ``a+bi``, ``a-bi``, ``bi`` or ``-i`` with rational or decimal parts."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty number")
    pure = _IMAGINARY.match(s)
    if pure:
        body = pure.group(2) or "1"
        return Scalar(Gaussian(0, -rational(body) if pure.group(1) == "-" else rational(body)))
    m = _COMPLEX.match(s)
    if not m or (m.group("re") is None and m.group("sign") is None):
        raise ValueError(f"cannot read {text!r} as a complex number")
    re_part = rational(m.group("re") or 0)
    im_part = 0
    if m.group("sign"):
        im_part = rational(m.group("im") or 1)
        if m.group("sign") == "-":
            im_part = -im_part
    return Scalar(Gaussian(re_part, im_part))


@dataclass(frozen=True)
class DriveSpec:
    """Drive on ``[0, horizon]``: exact piecewise-constant segments or a callable.

    ``segments`` holds ``(start, end, value)`` with exact rational times and
    Gaussian-rational values; time not covered by a segment carries zero
    drive.  ``function`` is a vectorized callable of time.
    """

    horizon: Fraction | float
    segments: tuple[tuple[Fraction, Fraction, Scalar], ...] | None = None
    function: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if (self.segments is None) == (self.function is None):
            raise ValueError("give exactly one of segments or function")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")
        if self.segments is not None:
            last = Fraction(0)
            for a, b, _ in self.segments:
                if a < last or b <= a:
                    raise ValueError("segments must be ascending, non-overlapping and non-empty")
                last = b
            if last > self.horizon:
                raise ValueError("segments extend beyond the horizon")

    @classmethod
    def piecewise(cls, segments: Sequence[tuple], horizon=None) -> "DriveSpec":
        segs = tuple((Fraction(a), Fraction(b), Scalar.coerce(v)) for a, b, v in segments)
        if horizon is None:
            horizon = segs[-1][1] if segs else Fraction(1)
        return cls(Fraction(horizon), segs)

    @classmethod
    def constant(cls, value, horizon) -> "DriveSpec":
        return cls.piecewise([(0, horizon, value)], horizon)

    @classmethod
    def sampled(cls, function: Callable, horizon: float) -> "DriveSpec":
        return cls(horizon, None, function)

    @classmethod
    def parse(cls, text: str, horizon=None) -> "DriveSpec":
        """Lines ``<t_start> <t_end> <value>``; ``#`` starts a comment."""
        segs = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected '<t_start> <t_end> <value>'")
            segs.append((rational(parts[0]), rational(parts[1]), parse_complex(parts[2])))
        return cls.piecewise(segs, horizon)

    @property
    def exact(self) -> bool:
        return self.segments is not None

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.function is not None:
            return np.asarray(self.function(t), dtype=complex) * np.ones_like(t)
        out = np.zeros_like(t, dtype=complex)
        for a, b, v in self.segments:
            out = np.where((t >= float(a)) & (t < float(b)), complex(v), out)
        return out

    def restricted(self, t) -> "DriveSpec":
        """Same drive on ``[0, t]``."""
        if t > self.horizon:
            raise ValueError(f"time {t} beyond the drive horizon {self.horizon}")
        if self.segments is None:
            return DriveSpec(t, None, self.function)
        t = Fraction(t)
        segs = tuple((a, min(b, t), v) for a, b, v in self.segments if a < t)
        return DriveSpec(t, segs)


def _simpson(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, n: int) -> complex:
    x = np.linspace(a, b, n + 1)
    w = np.ones(n + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return complex(np.sum(w * f(x)) * (b - a) / (3 * n))


def adaptive_simpson(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                     tol: float = 1e-10, n0: int = 16, max_n: int = 1 << 16) -> complex:
    """Composite Simpson rule, doubling the panel count until successive values agree."""
    n = n0
    prev = _simpson(f, a, b, n)
    while n < max_n:
        n *= 2
        cur = _simpson(f, a, b, n)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise ConvergenceError(f"Simpson rule did not reach {tol} with {max_n} panels")


def _triangle_simpson(outer: Callable, inner: Callable, t: float, tol: float = 1e-10) -> complex:
    """``int_0^t outer(s) int_0^s inner(u) du ds`` by nested Simpson rules."""
    def cumulative(s: np.ndarray, n: int) -> np.ndarray:
        # Simpson on [0, s_k] for every outer node with n panels each
        frac = np.linspace(0.0, 1.0, n + 1)
        w = np.ones(n + 1)
        w[1:-1:2] = 4
        w[2:-1:2] = 2
        u = np.outer(s, frac)
        return (inner(u) @ w) * s / (3 * n)

    n = 16
    prev = None
    while n <= 1 << 12:
        x = np.linspace(0.0, t, n + 1)
        w = np.ones(n + 1)
        w[1:-1:2] = 4
        w[2:-1:2] = 2
        cur = complex(np.sum(w * outer(x) * cumulative(x, n)) * t / (3 * n))
        if prev is not None and abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
        n *= 2
    raise ConvergenceError(f"nested Simpson rule did not reach {tol}")


# -- forced particle -------------------------------------------------------------

@dataclass(frozen=True)
class ParticleShift:
    """Momentum shift, coordinate shift and contraction of the driven particle."""

    momentum: Scalar | complex
    coordinate: Scalar | complex
    contraction: Scalar | complex

    def numeric(self) -> tuple[complex, complex, complex]:
        return complex(self.momentum), complex(self.coordinate), complex(self.contraction)


def forced_particle(drive: DriveSpec, mass=1, t=None) -> ParticleShift:
    """Shifts and contraction for the force ``F`` acting on a free particle.

    The interaction-picture generator is ``i F(tau) (q + p tau / m)``, so
    the ordered exponential equals
    ``exp(C) exp(i dp q) exp(-i dq p)`` with
    ``dp = int F``, ``dq = -(1/m) int F tau`` and
    ``C = (i / 2m) int int F(tau) F(sigma) max(tau, sigma)``.
    """
    t = drive.horizon if t is None else t
    drive = drive.restricted(t)
    if drive.exact:
        m = Scalar.coerce(Fraction(mass) if not isinstance(mass, float) else rational(mass))
        if m.sign() <= 0:
            raise ValueError("mass must be positive")
        for _, _, v in drive.segments:
            if not v.is_gaussian() or v.as_gaussian().im:
                raise ValueError("particle force must be real")
        dp, moment, kernel = ZERO, ZERO, ZERO
        segs = drive.segments
        for i, (a, b, f) in enumerate(segs):
            dp = dp + f * Scalar(b - a)
            moment = moment + f * Scalar((b * b - a * a) / 2)
            kernel = kernel + f * f * Scalar(2 * ((b ** 3 - a ** 3) / 3 - a * (b * b - a * a) / 2))
            for a2, b2, f2 in segs[i + 1:]:
                # the later segment supplies the maximum
                kernel = kernel + f * f2 * Scalar(2 * (b - a) * (b2 * b2 - a2 * a2) / 2)
        return ParticleShift(dp, -moment / m, I * kernel / (Scalar(2) * m))
    if mass <= 0:
        raise ValueError("mass must be positive")
    t = float(t)
    dp = adaptive_simpson(drive, 0.0, t)
    moment = adaptive_simpson(lambda x: drive(x) * x, 0.0, t)
    kernel = 2 * _triangle_simpson(lambda s: s * drive(s), drive, t)
    return ParticleShift(dp, -moment / mass, 1j * kernel / (2 * mass))


def particle_time_ordering(taus: Sequence, mass=1, n_modes: int = 1) -> tuple:
    """Collection of ``q + p tau / m`` at the given times plus the QP collection."""
    m = Fraction(mass)
    entries = [(f"x{k}", LinearCombination.from_qp([1], [Fraction(tau) / m]), Fraction(tau))
               for k, tau in enumerate(taus)]
    from .orderings import OrderedCollection

    return OrderedCollection(entries), builtin_ordering("qp")


def discretized_particle_contraction(drive: DriveSpec, mass=1, slices: int = 4) -> Scalar:
    """Exact contraction for a force sampled at slice midpoints.

    For the force ``F`` constant on each slice of width ``h`` the time
    ordered product over ``k`` slices has generators
    ``i F h (q + p tau_k / m)``; the contraction against QP ordering is
    computed exactly by :func:`general_contraction`.  As the slice count
    grows it approaches :func:`forced_particle`'s contraction.
    """
    if not drive.exact:
        raise RestrictionError("needs a piecewise-constant drive")
    t = drive.horizon
    h = Fraction(t) / slices
    taus = [h * (k + Fraction(1, 2)) for k in range(slices)]
    values = []
    for tau in taus:
        v = ZERO
        for a, b, f in drive.segments:
            if a <= tau < b:
                v = f
        values.append(v)
    timed, qp = particle_time_ordering(taus, mass)
    coeffs = {f"x{k}": I * values[k] * Scalar(h) for k in range(slices)}
    from .orderings import Decomposition

    dec = Decomposition(timed, coeffs)
    x = dec.x
    return general_contraction(Ordering(timed, dec), Ordering.of(qp, x))


def particle_unitary(shift: ParticleShift, cfg: FockConfig) -> np.ndarray:
    """``exp(C) exp(i dp q) exp(-i dq p)`` on the truncated space."""
    dp, dq, c = shift.numeric()
    a = annihilator(cfg.dim)
    q = (a + a.T) / np.sqrt(2)
    p = -1j * (a - a.T) / np.sqrt(2)
    return cmath.exp(c) * matexp(1j * dp * q) @ matexp(-1j * dq * p)


def particle_trotter(drive: DriveSpec, cfg: FockConfig, mass=1, steps: int = 1000, t=None) -> np.ndarray:
    """Time-ordered product of ``exp(i F(tau) (q + p tau/m) dt)`` slices."""
    t = float(drive.horizon if t is None else t)
    a = annihilator(cfg.dim)
    q = (a + a.T) / np.sqrt(2)
    p = -1j * (a - a.T) / np.sqrt(2)
    m = float(mass)
    schedule = discretize(lambda tau: 1j * complex(drive(tau)) * (q + p * tau / m), 0.0, t, steps)
    return trotter_ordered_exp(schedule, cfg)


def state_overlap(u: np.ndarray, v: np.ndarray, state: np.ndarray | None = None) -> complex:
    """``<u psi | v psi>`` for the vacuum or a given initial state."""
    if state is None:
        state = np.zeros(u.shape[0], dtype=complex)
        state[0] = 1
    return complex(np.vdot(u @ state, v @ state))


def forced_particle_wavefunction(x: np.ndarray, psi0: np.ndarray, shift: ParticleShift) -> np.ndarray:
    """Interaction-picture wave function ``exp(C) exp(i dp x) psi0(x - dq)`` on a grid.

    The shift uses linear interpolation on the uniform grid ``x``.
    """
    x = np.asarray(x, dtype=float)
    psi0 = np.asarray(psi0, dtype=complex)
    dp, dq, c = shift.numeric()
    if dq.imag or dp.imag:
        raise ValueError("shifts must be real")
    dq = dq.real
    if abs(dq) > x[-1] - x[0]:
        raise DomainError(f"coordinate shift {dq} exceeds the grid extent")
    moved = np.interp(x - dq, x, psi0.real, left=0.0, right=0.0) \
        + 1j * np.interp(x - dq, x, psi0.imag, left=0.0, right=0.0)
    return cmath.exp(c) * np.exp(1j * dp.real * x) * moved


def fock_to_grid(amplitudes: np.ndarray, x: np.ndarray) -> np.ndarray:
    from .fock import hermite_functions

    return np.asarray(amplitudes) @ hermite_functions(len(amplitudes), x)


# -- driven cavity ---------------------------------------------------------------

@dataclass(frozen=True)
class CavityShift:
    """``dc`` (coefficient of c^dagger is ``-dc``), its conjugate and the contraction."""

    shift: Scalar | complex
    shift_conj: Scalar | complex
    contraction: Scalar | complex

    def numeric(self) -> tuple[complex, complex, complex]:
        return complex(self.shift), complex(self.shift_conj), complex(self.contraction)


def _phase_integral(a: float, b: float, w: float) -> complex:
    """``int_a^b exp(-i w tau) d tau``."""
    if w == 0:
        return complex(b - a)
    return (cmath.exp(-1j * w * a) - cmath.exp(-1j * w * b)) / (1j * w)


def _phase_triangle(length: float, w: float) -> complex:
    """``int_0^L int_0^tau exp(-i w (tau - sigma)) d sigma d tau``."""
    if w == 0:
        return complex(length * length / 2)
    return (length - (1 - cmath.exp(-1j * w * length)) / (1j * w)) / (1j * w)


def driven_cavity(drive: DriveSpec, omega=0, t=None) -> CavityShift:
    """Normal-ordered form of the driven cavity evolution.

    The interaction-picture generator is
    ``-E(tau) e^{i w tau} c^dagger + E*(tau) e^{-i w tau} c``; the result is
    ``exp(C) exp(-dc c^dagger) exp(dc* c)`` with
    ``dc* = int E* e^{-i w tau}`` and
    ``C = -int int_{tau > sigma} E*(tau) E(sigma) e^{-i w (tau - sigma)}``.
    Exact for piecewise-constant drives at ``w = 0``; otherwise complex floats.
    """
    t = drive.horizon if t is None else t
    drive = drive.restricted(t)
    if drive.exact and omega == 0:
        total, contraction = ZERO, ZERO
        for i, (a, b, e) in enumerate(drive.segments):
            ec = e.conjugate()
            total = total + ec * Scalar(b - a)
            contraction = contraction - ec * e * Scalar((b - a) ** 2 / 2)
            for a2, b2, e2 in drive.segments[i + 1:]:
                contraction = contraction - e2.conjugate() * e * Scalar((b2 - a2) * (b - a))
        return CavityShift(total.conjugate(), total, contraction)
    w = float(omega)
    if drive.exact:
        segs = [(float(a), float(b), complex(e)) for a, b, e in drive.segments]
        total = sum(e.conjugate() * _phase_integral(a, b, w) for a, b, e in segs)
        contraction = 0j
        for i, (a, b, e) in enumerate(segs):
            contraction -= abs(e) ** 2 * _phase_triangle(b - a, w)
            for a2, b2, e2 in segs[i + 1:]:
                contraction -= e2.conjugate() * _phase_integral(a2, b2, w) * e * _phase_integral(a, b, -w)
        return CavityShift(total.conjugate(), total, contraction)
    tf = float(t)
    total = adaptive_simpson(lambda s: np.conj(drive(s)) * np.exp(-1j * w * s), 0.0, tf)
    contraction = -_triangle_simpson(lambda s: np.conj(drive(s)) * np.exp(-1j * w * s),
                                     lambda s: drive(s) * np.exp(1j * w * s), tf)
    return CavityShift(complex(total).conjugate(), total, contraction)


def cavity_unitary(shift: CavityShift, cfg: FockConfig) -> np.ndarray:
    dc, dcc, c = shift.numeric()
    a = annihilator(cfg.dim)
    return cmath.exp(c) * matexp(-dc * a.T) @ matexp(dcc * a)


def cavity_trotter(drive: DriveSpec, cfg: FockConfig, omega=0, steps: int = 1000, t=None) -> np.ndarray:
    t = float(drive.horizon if t is None else t)
    a = annihilator(cfg.dim)
    w = float(omega)

    def density(tau):
        e = complex(drive(tau))
        return -e * cmath.exp(1j * w * tau) * a.T + e.conjugate() * cmath.exp(-1j * w * tau) * a

    return trotter_ordered_exp(discretize(density, 0.0, t, steps), cfg)


def unitarity_error(u: np.ndarray, margin: int, cfg: FockConfig | None = None) -> float:
    return compare_block(u.conj().T @ u, np.eye(u.shape[0]), margin, cfg)


# -- squeezing -------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianNormalForm:
    """``prefactor * N exp(alpha c^dagger^2 + beta c^dagger c + gamma c^2)``.

    ``prefactor_squared`` is kept exactly; ``prefactor`` is its principal
    square root as a float.
    """

    prefactor_squared: Scalar
    alpha: Scalar
    beta: Scalar
    gamma: Scalar

    @property
    def prefactor(self) -> complex:
        return cmath.sqrt(complex(self.prefactor_squared))

    def qp_symbol_exponent(self):
        """The exponent with ``c, c^dagger`` replaced by ``(q +- i p)/sqrt 2`` as commuting symbols.

        Words are written ``p^a q^b``; this is the form inside the ordering
        symbol, not an operator identity.
        """
        from .algebra import OperatorPolynomial

        half = Scalar(Fraction(1, 2))
        # (q - i p)^2, (q^2 + p^2), (q + i p)^2 as {(p power, q power): coefficient}
        shapes = {
            "alpha": {(0, 2): ONE, (1, 1): -Scalar(2) * I, (2, 0): -ONE},
            "beta": {(0, 2): ONE, (2, 0): ONE},
            "gamma": {(0, 2): ONE, (1, 1): Scalar(2) * I, (2, 0): -ONE},
        }
        acc: dict = {}
        for name, shape in shapes.items():
            k = getattr(self, name) * half
            for key, c in shape.items():
                acc[key] = acc.get(key, ZERO) + k * c
        out = OperatorPolynomial()
        for (pp, qq), c in acc.items():
            if c:
                out = out + OperatorPolynomial.word(["p"] * pp + ["q"] * qq, c)
        return out


def squeezing_normal_form(mu) -> GaussianNormalForm:
    """Normal-ordered form of the unitary dilation by ``mu`` (``psi(x) -> sqrt(mu) psi(mu x)``).

    ``alpha = -gamma = (1 - mu^2) / (2 (1 + mu^2))``,
    ``beta = -(1 - mu)^2 / (1 + mu^2)`` and prefactor
    ``sqrt(2 mu / (1 + mu^2))``.
    """
    mu = Fraction(mu) if not isinstance(mu, float) else Fraction(rational(mu))
    if mu <= 0:
        raise ValueError("squeezing parameter must be positive")
    d = 1 + mu * mu
    alpha = (1 - mu * mu) / (2 * d)
    return GaussianNormalForm(Scalar(2 * mu / d), Scalar(alpha), Scalar(-(1 - mu) ** 2 / d), Scalar(-alpha))


def squeeze_generator_matrix(mu: float, cfg: FockConfig, internal_dim: int | None = None) -> np.ndarray:
    """``exp(i ln(mu) (qp + pq) / 2)`` cropped to ``cfg.dim`` levels.

    The generator moves number states by two per power, so exponentiating it
    inside the target space itself corrupts low levels as well.  The
    exponential is therefore taken on ``internal_dim`` levels (default
    ``2 * cfg.dim``) and cropped; ``internal_dim=cfg.dim`` gives the plain
    truncated exponential.
    """
    big = 2 * cfg.dim if internal_dim is None else internal_dim
    if big < cfg.dim:
        raise ValueError("internal dimension must be at least the target dimension")
    a = annihilator(big)
    q = (a + a.T) / np.sqrt(2)
    p = -1j * (a - a.T) / np.sqrt(2)
    return matexp(1j * math.log(float(mu)) * (q @ p + p @ q) / 2)[:cfg.dim, :cfg.dim]


def vacuum_power_diagonal(beta: complex, dim: int) -> np.ndarray:
    """``N exp(beta c^dagger c) = (1 + beta)^n`` on number states, with ``0^0 = 1``."""
    base = 1 + complex(beta)
    try:
        return np.array([base ** n if n else 1.0 for n in range(dim)], dtype=complex)
    except OverflowError as exc:
        raise NumericRangeError("(1 + beta)^n overflows") from exc


def normal_ordered_exp_series(beta: complex, dim: int, terms: int | None = None) -> np.ndarray:
    """``sum_k beta^k (c^dagger)^k c^k / k!`` summed directly (reference for the diagonal)."""
    a = annihilator(dim)
    out = np.zeros((dim, dim), dtype=complex)
    lower = np.eye(dim, dtype=complex)
    for k in range(terms or dim):
        out += complex(beta) ** k / math.factorial(k) * (lower.conj().T @ lower)
        lower = a @ lower
    return out


def normal_ordered_gaussian_matrix(g: GaussianNormalForm, cfg: FockConfig) -> np.ndarray:
    """``prefactor exp(alpha c^dagger^2) diag((1+beta)^n) exp(gamma c^2)``."""
    a = annihilator(cfg.dim)
    diag = np.diag(vacuum_power_diagonal(complex(g.beta), cfg.dim))
    return g.prefactor * matexp(complex(g.alpha) * a.T @ a.T) @ diag @ matexp(complex(g.gamma) * a @ a)


# -- the unraveling route --------------------------------------------------------

def pq_to_normal_contraction(sign: int) -> Scalar:
    """Contraction from normal to PQ ordering for ``X = i z p + sign z* q``."""
    z, zc = Scalar.var("z"), Scalar.var("zc")
    x = LinearCombination.from_qp([zc * Scalar(sign)], [I * z])
    return general_contraction(Ordering.of(builtin_ordering("pq"), x), Ordering.of(builtin_ordering("normal"), x))


def squeezer_by_unraveling(branch: str = "mu>1"):
    """Normal-ordered squeezer derived by a Gaussian average over linear exponentials.

    ``O_PQ exp(i k p q)`` (``k = 1 - 1/mu``) is written as the average of
    ``O_PQ exp(i z p + s z* q)`` over ``z`` with weight
    ``exp(-|z|^2/|k|) / (pi |k|)`` and ``s = sign(k)``.  Each linear
    exponential is normal ordered with the contraction from
    :func:`general_contraction`, the ``z`` integral is done symbolically, and
    the overall ``sqrt(mu)`` relating ``O_PQ exp(i k p q)`` to the unitary
    dilation is divided out.  Returns sympy expressions in the positive
    symbol ``mu`` keyed by ``prefactor_squared``, ``alpha``, ``beta``,
    ``gamma``.
    """
    import sympy as sp

    if branch not in ("mu>1", "mu<1"):
        raise ValueError("branch must be 'mu>1' or 'mu<1'")
    sign = 1 if branch == "mu>1" else -1
    mu = sp.Symbol("mu", positive=True)
    x, y, u, v = sp.symbols("x y u v")
    kappa = 1 - 1 / mu
    width = sign * kappa  # |kappa| on this branch
    z, zc = x + sp.I * y, x - sp.I * y
    contraction = pq_to_normal_contraction(sign).to_sympy({"z": z, "zc": zc})
    # N exp(i z p + s z* q) = exp(a c^dagger) exp(b c) with q = (c + cd)/sqrt2, p = -i (c - cd)/sqrt2
    a_cd = (-z + sign * zc) / sp.sqrt(2)
    b_c = (z + sign * zc) / sp.sqrt(2)
    exponent = sp.expand(-(x ** 2 + y ** 2) / width + contraction + a_cd * u + b_c * v)
    w = sp.Matrix([x, y])
    hess = sp.hessian(exponent, (x, y))
    grad0 = sp.Matrix([sp.diff(exponent, s).subs({x: 0, y: 0}) for s in (x, y)])
    m = -hess
    det = sp.simplify(m.det())
    quad = sp.expand(sp.simplify((grad0.T * m.inv() * grad0)[0] / 2))
    # int exp(-w.M.w/2 + J.w) dx dy = 2 pi / sqrt(det M) exp(J.M^-1.J / 2), divided by pi |kappa|
    prefactor_sq = sp.simplify((2 / (width * sp.sqrt(det))) ** 2 / mu)
    poly = sp.Poly(quad, u, v)
    return {
        "prefactor_squared": prefactor_sq,
        "alpha": sp.simplify(poly.coeff_monomial(u ** 2)),
        "beta": sp.simplify(poly.coeff_monomial(u * v)),
        "gamma": sp.simplify(poly.coeff_monomial(v ** 2)),
        "mu": mu,
    }


def squeezer_closed_form_symbolic():
    import sympy as sp

    mu = sp.Symbol("mu", positive=True)
    d = 1 + mu ** 2
    alpha = (1 - mu ** 2) / (2 * d)
    return {"prefactor_squared": 2 * mu / d, "alpha": alpha, "beta": -(1 - mu) ** 2 / d, "gamma": -alpha, "mu": mu}


def squeezer_routes_agree(branch: str = "mu>1") -> bool:
    import sympy as sp

    derived = squeezer_by_unraveling(branch)
    closed = squeezer_closed_form_symbolic()
    return all(sp.simplify(derived[k] - closed[k]) == 0
               for k in ("prefactor_squared", "alpha", "beta", "gamma"))


# -- numeric check of the Gaussian average ---------------------------------------

@dataclass(frozen=True)
class UnravelReport:
    kappa: float
    error: float
    coarse_error: float
    converged: bool


def _exp_hermitian(vals: np.ndarray, vecs: np.ndarray, coeff: complex, keep: int) -> np.ndarray:
    return (vecs[:keep] * np.exp(coeff * vals)) @ vecs[:keep].conj().T


def _gaussian_average(kappa: float, dim: int, radius: float, nodes: int, extra: int) -> np.ndarray:
    """``int O_PQ exp(i z p + s z* q) exp(-|z|^2/|k|) d^2z / (pi |k|)`` truncated to ``dim``."""
    big = dim + extra
    a = annihilator(big)
    q = (a + a.T) / np.sqrt(2)
    p = -1j * (a - a.T) / np.sqrt(2)
    lp, vp = np.linalg.eigh(p)
    lq, vq = np.linalg.eigh(q)
    sign = 1.0 if kappa > 0 else -1.0
    width = abs(kappa)
    # z = sqrt(width) (x + i y); trapezoid nodes on [-radius, radius]^2 with weight exp(-x^2-y^2)/pi
    grid = np.linspace(-radius, radius, nodes)
    h = grid[1] - grid[0]
    wts = np.exp(-grid ** 2) * h
    r = np.sqrt(width)
    # exp(i z p) exp(s z* q) in the eigenbases: entry (j, k) carries
    # exp(i z lp_j + s z* lq_k) = exp(x r (i lp_j + s lq_k)) exp(y r (-lp_j - i s lq_k))
    phase_x = np.exp(np.multiply.outer(grid * r, 1j * lp[:, None] + sign * lq[None, :]))
    phase_y = np.exp(np.multiply.outer(grid * r, -lp[:, None] - 1j * sign * lq[None, :]))
    fx = np.tensordot(wts, phase_x, axes=1)
    fy = np.tensordot(wts, phase_y, axes=1)
    overlap = vp.conj().T @ vq
    middle = overlap * fx * fy / np.pi
    return (vp[:dim] @ middle @ vq[:dim].conj().T)


def pq_series_matrix(kappa: float, dim: int, tol: float = 1e-16, max_terms: int = 200) -> np.ndarray:
    """``sum_n (i k)^n / n! p^n q^n`` truncated to ``dim``; needs ``|k|`` small."""
    out = None
    for n_terms in (20, 40, 80, max_terms):
        big = dim + 2 * n_terms + 2
        a = annihilator(big)
        q = (a + a.T) / np.sqrt(2)
        p = -1j * (a - a.T) / np.sqrt(2)
        total = np.eye(big, dtype=complex)
        pn = np.eye(big, dtype=complex)
        qn = np.eye(big, dtype=complex)
        last = np.inf
        for n in range(1, n_terms + 1):
            pn = pn @ p
            qn = qn @ q
            term = (1j * kappa) ** n / math.factorial(n) * (pn @ qn)
            total += term
            last = np.max(np.abs(term[:dim, :dim]))
        out = total[:dim, :dim]
        if last < tol:
            return out
    raise ConvergenceError(f"series for kappa = {kappa} did not converge")


def pq_unravel_check(kappa: float, cfg: FockConfig, radius: float = 6.0, nodes: int = 120,
                     reference: str = "series", margin: int | None = None, extra: int = 60,
                     floor: float = 1e-8) -> UnravelReport:
    """Compare the quadrature of the Gaussian average with a reference matrix.

    ``reference="series"`` sums ``O_PQ exp(i k p q)`` directly (small ``k``);
    ``reference="squeezer"`` uses ``sqrt(mu)`` times the normal-ordered
    squeezer with ``mu = 1 / (1 - k)``.  Convergence means the error did not
    grow when halving the node spacing, or both errors sit below ``floor``
    where rounding dominates.
    """
    if kappa == 0 or abs(kappa) > 1:
        raise ValueError("need 0 < |kappa| <= 1")
    if reference == "series":
        ref = pq_series_matrix(kappa, cfg.dim)
    elif reference == "squeezer":
        if kappa >= 1:
            raise ValueError("squeezer reference needs kappa < 1")
        mu = 1 / (1 - kappa)
        ref = math.sqrt(mu) * normal_ordered_gaussian_matrix(squeezing_normal_form(mu), cfg)
    else:
        raise ValueError("reference must be 'series' or 'squeezer'")
    margin = cfg.dim // 2 if margin is None else margin
    fine = _gaussian_average(kappa, cfg.dim, radius, nodes, extra)
    coarse = _gaussian_average(kappa, cfg.dim, radius, max(nodes // 2, 3), extra)
    err = compare_block(fine, ref, margin, cfg)
    coarse_err = compare_block(coarse, ref, margin, cfg)
    return UnravelReport(float(kappa), err, coarse_err, err <= coarse_err or max(err, coarse_err) < floor)
