"""Exponential sums with divisor coefficients.

All sums here have the shape sum_{m <= x} d(m) e(eta m) with e(y) = exp(2 pi i y).
Because m is an integer only eta mod 1 matters; it is reduced at the full
working precision, stored as a double-double pair, and the products eta*m
are reduced mod 1 one by one (never accumulated incrementally).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from ._phase import reduced_phase, split_mpf, unit_phasor
from .divisor import DivisorTable
from .errors import DomainError, OutOfRangeError, PrecisionError
from .parallel import exact_csum
from .precision import PrecisionComplex

# cost grows linearly with the digits of e^{2 pi k}
RESONANT_DIGITS_CAP = 5000


def phase_digits_required(x: float, eta) -> int:
    mag = float(abs(mp.mpf(eta))) * max(float(x), 1.0)
    return math.ceil(math.log10(max(mag, 1.0))) + 20


@dataclass(frozen=True)
class WiltonQuery:
    """Range ``x`` and frequency ``eta`` of a Wilton sum D(x, eta)."""

    x: float
    eta: mp.mpf
    digits: int | None = None

    def __post_init__(self):
        if self.x <= 0:
            raise DomainError(f"x must be positive, got {self.x}")
        object.__setattr__(self, "eta", mp.mpf(self.eta))
        need = phase_digits_required(self.x, self.eta)
        if self.digits is None:
            object.__setattr__(self, "digits", max(30, need))
        elif self.digits < need:
            raise PrecisionError(
                f"D(x={self.x}, eta) needs {need} digits, got {self.digits}",
                required_digits=need, available_digits=self.digits)


def canonical_frequency(eta, digits: int) -> mp.mpf:
    """eta reduced into (0, 1] at ``digits`` precision."""
    with mp.workdps(digits + 10):
        eta = mp.mpf(eta)
        frac = eta - mp.floor(eta)
        return frac if frac != 0 else mp.mpf(1)


def _divisor_phase_sum(freq, n_max: int, table: DivisorTable) -> complex:
    if n_max <= 0:
        return 0j
    if n_max > table.limit:
        raise OutOfRangeError(f"range {n_max} exceeds table limit {table.limit}")
    hi, lo = split_mpf(freq)
    m = np.arange(1, n_max + 1, dtype=np.float64)
    terms = table.values[:n_max] * unit_phasor(reduced_phase(m, hi, lo))
    return exact_csum(terms)


def _terms(freq, n_max: int, table: DivisorTable) -> np.ndarray:
    hi, lo = split_mpf(freq)
    m = np.arange(1, n_max + 1, dtype=np.float64)
    return table.values[:n_max] * unit_phasor(reduced_phase(m, hi, lo))


def wilton_sum(q: WiltonQuery, table: DivisorTable) -> PrecisionComplex:
    """D(x, eta) = sum_{m <= x} d(m) e(eta m)."""
    n_max = int(math.floor(q.x))
    if n_max > table.limit:
        raise OutOfRangeError(f"x={q.x} exceeds table limit {table.limit}")
    freq = canonical_frequency(q.eta, q.digits)
    return PrecisionComplex.from_value(_divisor_phase_sum(freq, n_max, table))


def wilton_identity_residual(q: WiltonQuery, table: DivisorTable) -> float:
    """|D(x, eta) - eta^{-1} D(eta^2 x, -1/eta)| for 0 < eta <= 1 and eta^2 x <= 1."""
    with mp.workdps(q.digits + 10):
        eta = q.eta
        if not 0 < eta <= 1:
            raise DomainError(f"the Wilton identity needs 0 < eta <= 1, got {eta}")
        dual_x = eta ** 2 * q.x
        # eta is often given to float precision; snap eta^2 x onto a nearby integer
        if abs(dual_x - mp.nint(dual_x)) < mp.mpf(10) ** -12:
            dual_x = mp.nint(dual_x)
        if dual_x > 1:
            raise DomainError(f"the Wilton identity needs eta^2 x <= 1, got {mp.nstr(dual_x, 8)}")
        dual_eta = -1 / eta
        direct = complex(wilton_sum(q, table))
        dual_q = WiltonQuery(float(dual_x), dual_eta, max(q.digits, phase_digits_required(dual_x, dual_eta)))
        dual = complex(wilton_sum(dual_q, table)) / float(eta)
    return abs(direct - dual)


def resonant_required_digits(k: int, x: float) -> int:
    return math.ceil(2 * math.pi * k / math.log(10) + math.log10(max(x, 1.0)) + 20)


def _resonant_frequency(k: int, x: float, digits: int | None):
    if k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    need = resonant_required_digits(k, x)
    if need > RESONANT_DIGITS_CAP:
        raise PrecisionError(
            f"e(-m e^(2 pi k)) for k={k}, x={x:g} needs {need} digits, cap is {RESONANT_DIGITS_CAP}",
            required_digits=need, available_digits=RESONANT_DIGITS_CAP)
    if digits is None:
        digits = need
    elif digits < need:
        raise PrecisionError(f"k={k}, x={x:g} needs {need} digits, got {digits}",
                             required_digits=need, available_digits=digits)
    with mp.workdps(digits + 10):
        eta = -mp.exp(2 * mp.pi * k)
    return canonical_frequency(eta, digits)


def resonant_divisor_sum(k: int, x: float, table: DivisorTable,
                         digits: int | None = None) -> PrecisionComplex:
    """sum_{m <= x} d(m) e(-m e^{2 pi k}), the sum left over by the interior saddle points."""
    n_max = int(math.floor(x))
    if n_max > table.limit:
        raise OutOfRangeError(f"x={x} exceeds table limit {table.limit}")
    freq = _resonant_frequency(k, x, digits)
    return PrecisionComplex.from_value(_divisor_phase_sum(freq, n_max, table))


@dataclass(frozen=True)
class BoundRow:
    k: int
    x: float
    re: float
    im: float
    abs: float
    normalized: float

    CSV_HEADER = ("k", "x", "re", "im", "abs", "normalized")

    def as_tuple(self):
        return (self.k, self.x, self.re, self.im, self.abs, self.normalized)


def conditional_bound_report(k: int, x_grid, K: float, table: DivisorTable,
                             digits: int | None = None) -> list[BoundRow]:
    """|sum_{m<=x} d(m) e(m e^{2 pi k})| / (x^{1/2} log^{2+K} x) along ``x_grid``.

    Diagnostic only: the bound it normalises by holds under an unproven
    hypothesis on the partial quotients of e^{2 pi k}.
    """
    xs = [float(x) for x in x_grid]
    if not xs:
        return []
    if K < 0:
        raise DomainError(f"K must be nonnegative, got {K}")
    if min(xs) <= 1:
        raise DomainError("x values must exceed 1 so that log x > 0")
    x_max = max(xs)
    if int(x_max) > table.limit:
        raise OutOfRangeError(f"x={x_max} exceeds table limit {table.limit}")
    # the + sign variant is the conjugate of the resonant sum; moduli agree
    freq = _resonant_frequency(k, x_max, digits)
    terms = np.conj(_terms(freq, int(x_max), table))
    rows = []
    for x in sorted(xs):
        z = exact_csum(terms[: int(x)])
        a = abs(z)
        rows.append(BoundRow(k, x, z.real, z.imag, a, a / (math.sqrt(x) * math.log(x) ** (2 + K))))
    return rows
