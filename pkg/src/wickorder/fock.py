"""Truncated Fock-space matrices: the numeric oracle for symbolic results.

Mode ``k`` is represented on number states ``|0>..|N-1>``; several modes are
combined by Kronecker products with mode 1 as the slowest index.  A word of
degree ``d`` shifts number states by at most ``d``, so truncation defects
stay within the top ``d`` levels of each mode.  Comparisons are therefore
made on the "safe block" of states with every occupation below ``N - d``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.linalg import expm

from .algebra import C, CD, P, Q, LinearCombination, OperatorPolynomial, mode_of, species_of
from .errors import DimensionError, NumericRangeError


@dataclass(frozen=True)
class FockConfig:
    """Truncation ``dim`` per mode and number of modes."""

    dim: int
    n_modes: int = 1

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("Fock dimension must be at least 2")
        if self.n_modes < 1:
            raise ValueError("need at least one mode")

    @property
    def size(self) -> int:
        return self.dim ** self.n_modes


@lru_cache(maxsize=64)
def _single_mode(species: int, dim: int) -> np.ndarray:
    lower = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    raise_ = lower.T.copy()
    if species == C:
        m = lower
    elif species == CD:
        m = raise_
    elif species == Q:
        m = (lower + raise_) / np.sqrt(2)
    else:
        m = -1j * (lower - raise_) / np.sqrt(2)
    m.setflags(write=False)
    return m


def annihilator(dim: int) -> np.ndarray:
    return _single_mode(C, dim).copy()


@lru_cache(maxsize=256)
def _generator_matrix(g: int, dim: int, n_modes: int) -> np.ndarray:
    k = mode_of(g) + 1
    if k > n_modes:
        raise DimensionError(f"generator of mode {k} in a {n_modes}-mode system")
    out = np.ones((1, 1), dtype=complex)
    for j in range(1, n_modes + 1):
        block = _single_mode(species_of(g), dim) if j == k else np.eye(dim, dtype=complex)
        out = np.kron(out, block)
    out.setflags(write=False)
    return out


def generator_matrix(name: str, cfg: FockConfig, mode: int = 1) -> np.ndarray:
    from .algebra import gen

    return _generator_matrix(gen(name, mode), cfg.dim, cfg.n_modes).copy()


def represent(poly: OperatorPolynomial | LinearCombination, cfg: FockConfig,
              bindings: Mapping[str, complex] | None = None) -> np.ndarray:
    """Matrix of ``poly``, multiplying the generator matrices word by word."""
    if isinstance(poly, LinearCombination):
        poly = poly.to_poly()
    out = np.zeros((cfg.size, cfg.size), dtype=complex)
    for word, coeff in poly.items():
        value = coeff.to_complex(bindings)
        m = np.eye(cfg.size, dtype=complex)
        for g in word:
            m = m @ _generator_matrix(g, cfg.dim, cfg.n_modes)
        out += value * m
    return out


def matexp(m: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling and squaring with Pade approximants)."""
    m = np.asarray(m)
    if not np.all(np.isfinite(m)):
        raise NumericRangeError("matrix has non-finite entries")
    with np.errstate(over="raise", invalid="raise"):
        try:
            out = expm(m)
        except FloatingPointError as exc:
            raise NumericRangeError(str(exc)) from exc
    if not np.all(np.isfinite(out)):
        raise NumericRangeError("matrix exponential overflowed")
    return out


Increment = np.ndarray | OperatorPolynomial | LinearCombination


def trotter_ordered_exp(schedule: Sequence[tuple[float, Increment]], cfg: FockConfig,
                        bindings: Mapping[str, complex] | None = None) -> np.ndarray:
    """Product of ``exp(increment)`` over the schedule, latest time leftmost."""
    times = [t for t, _ in schedule]
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("schedule times must be ascending")
    out = np.eye(cfg.size, dtype=complex)
    for _, inc in schedule:
        m = inc if isinstance(inc, np.ndarray) else represent(inc, cfg, bindings)
        out = matexp(m) @ out
    return out


def discretize(increment_density: Callable[[float], np.ndarray], t0: float, t1: float,
               steps: int) -> list[tuple[float, np.ndarray]]:
    """Midpoint schedule ``[(tau_j, density(tau_j) * dt)]`` on ``[t0, t1]``."""
    if steps < 1:
        raise ValueError("need at least one step")
    if t1 < t0:
        raise ValueError("end time precedes start time")
    dt = (t1 - t0) / steps
    return [(t0 + (j + 0.5) * dt, np.asarray(increment_density(t0 + (j + 0.5) * dt)) * dt)
            for j in range(steps)]


def safe_indices(cfg: FockConfig, margin: int) -> np.ndarray:
    """Basis indices whose every mode occupation is below ``dim - margin``."""
    if margin < 0:
        raise ValueError("margin must be non-negative")
    keep = cfg.dim - margin
    if keep <= 0:
        raise ValueError(f"margin {margin} leaves no safe block at dimension {cfg.dim}")
    occupations = np.indices((cfg.dim,) * cfg.n_modes).reshape(cfg.n_modes, -1)
    return np.flatnonzero(np.all(occupations < keep, axis=0))


def compare_block(a: np.ndarray, b: np.ndarray, margin: int, cfg: FockConfig | None = None) -> float:
    """Max absolute entry difference on the safe block."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"matrix shapes differ: {a.shape} vs {b.shape}")
    if cfg is None:
        cfg = FockConfig(a.shape[0])
    if cfg.size != a.shape[0]:
        raise DimensionError("configuration does not match the matrix size")
    idx = safe_indices(cfg, margin)
    block = np.ix_(idx, idx)
    return float(np.max(np.abs(a[block] - b[block])))


def blocks_agree(a, b, margin: int, tol: float, cfg: FockConfig | None = None) -> bool:
    return compare_block(a, b, margin, cfg) <= tol


def hermite_functions(n: int, x: np.ndarray) -> np.ndarray:
    """Rows ``k = 0..n-1``: normalized oscillator eigenfunctions ``<x|k>``."""
    x = np.asarray(x, dtype=float)
    out = np.zeros((n, x.size))
    out[0] = np.pi ** -0.25 * np.exp(-x ** 2 / 2)
    if n > 1:
        out[1] = np.sqrt(2) * x * out[0]
    for k in range(2, n):
        out[k] = np.sqrt(2 / k) * x * out[k - 1] - np.sqrt((k - 1) / k) * out[k - 2]
    return out
