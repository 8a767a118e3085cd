"""Evaluation of zeta, the chi factor, and the approximate functional equation of zeta^2.

Two evaluators of zeta are provided.  :func:`zeta_reference` is an
arbitrary-precision Euler-Maclaurin summation with a rigorous remainder
bound and serves as the oracle.  :func:`zeta_many` runs the same formula
vectorised in float64 (with double-double phases) for the bulk sums of the
moment computations, where thousands of values are needed.
"""
from __future__ import annotations

import math

import mpmath as mp
import numpy as np

from ._phase import LOG_TABLE, PHASE_DIGITS, reduced_phase, unit_phasor
from .divisor import DivisorTable, delta, delta_float
from .errors import DomainError, OutOfRangeError, PrecisionError, ResourceError
from .precision import MIN_DIGITS, PrecisionComplex, as_mpc, digits_of

ZETA_DIGITS_CAP = 1000
# beyond this t the float64 evaluator loses its accuracy guarantee
ZETA_MANY_T_CAP = 2.0e5


def _odd_pole_distance(s: mp.mpc) -> mp.mpf:
    # distance from s to the nearest odd positive integer
    k = max(0, int(mp.floor((s.real - 1) / 2 + mp.mpf(0.5))))
    return abs(s - (2 * k + 1))


def chi(s, asymptotic: bool = False) -> PrecisionComplex:
    """chi(s) = 2^s pi^(s-1) sin(pi s/2) Gamma(1-s), so that zeta(s) = chi(s) zeta(1-s).

    With ``asymptotic=True`` the leading term of the large-|t| expansion is
    returned instead (relative error O(1/|t|), needs |Im s| >= 1).
    """
    digits = digits_of(s, 30)
    with mp.workdps(digits + 10):
        z = as_mpc(s)
        if _odd_pole_distance(z) < mp.mpf(10) ** (-digits / 2):
            raise DomainError(f"chi has a pole at odd positive integers; s={z} is too close")
        if asymptotic:
            value = _chi_asymptotic(z)
        elif z.real <= 0.5:
            value = _chi_product(z)
        else:
            value = 1 / _chi_product(1 - z)
    return PrecisionComplex.from_value(value, digits)


def _chi_product(z):
    return mp.power(2, z) * mp.power(mp.pi, z - 1) * mp.sin(mp.pi * z / 2) * mp.gamma(1 - z)


def _chi_asymptotic(z):
    # chi(1 - w) ~ e^{-i pi/4} (t/2pi)^(sigma-1/2) exp(i t log(t/(2 pi e))) for w = sigma + it, t >= 1
    if abs(z.imag) < 1:
        raise DomainError("asymptotic chi needs |Im s| >= 1")
    if z.imag > 0:
        return mp.conj(_chi_asymptotic(mp.conj(z)))
    w = 1 - z
    sigma, t = w.real, w.imag
    return (mp.expjpi(mp.mpf(-1) / 4) * (t / (2 * mp.pi)) ** (sigma - mp.mpf(0.5))
            * mp.expj(t * mp.log(t / (2 * mp.pi * mp.e))))


def em_terms(t: float) -> int:
    """Number of initial terms used by the reference Euler-Maclaurin sum."""
    return max(50, math.ceil(2 * abs(t)))


def zeta_reference(s, digits: int = 30) -> PrecisionComplex:
    """zeta(s) by Euler-Maclaurin summation, absolute error below 10^-digits."""
    if digits > ZETA_DIGITS_CAP:
        raise ResourceError(f"{digits} digits requested, cap is {ZETA_DIGITS_CAP}")
    digits = max(digits, MIN_DIGITS)
    z0 = as_mpc(s)
    if abs(z0 - 1) < mp.mpf(10) ** (-digits / 2):
        raise DomainError("zeta has a pole at s = 1")
    N = em_terms(float(z0.imag))
    guard = 10 + int(math.log10(N)) + max(0, int(-float(z0.real) * math.log10(N)))
    with mp.workdps(digits + guard):
        z = mp.mpc(z0)
        sigma = z.real
        head = mp.fsum(mp.power(n, -z) for n in range(1, N))
        Ns = mp.power(N, -z)
        total = head + N * Ns / (z - 1) + Ns / 2
        eps = mp.mpf(10) ** (-digits - 2)
        poch = z  # s(s+1)...(s+2j-2)
        power = Ns / N  # N^(-s-2j+1)
        j = 1
        while True:
            total += mp.bernoulli(2 * j) / mp.factorial(2 * j) * poch * power
            # remainder after j correction terms
            nxt_poch = poch * (z + 2 * j - 1) * (z + 2 * j)
            denom = sigma + 2 * j + 1
            if denom > 0:
                bound = (abs(nxt_poch * mp.bernoulli(2 * j + 2) / mp.factorial(2 * j + 2))
                         * mp.power(N, -sigma - 2 * j - 1) / denom)
                if bound < eps:
                    break
            if j > 400:
                raise ResourceError("Euler-Maclaurin correction series did not reach the target")
            poch = nxt_poch
            power = power / (N * N)
            j += 1
        return PrecisionComplex.from_value(total, digits)


# B_{2j} / (2j)! for j = 1..80
_BERN_COEFF = np.array([float(mp.bernoulli(2 * j) / mp.factorial(2 * j)) for j in range(1, 81)])


def _bulk_terms(t_max: float) -> int:
    return max(50, math.ceil(abs(t_max) / math.pi))


def zeta_many(s, chunk: int = 32) -> np.ndarray:
    """zeta at many points in float64, relative accuracy about 1e-12 for |t| <= 2e5.

    Same Euler-Maclaurin formula as the reference, with N = max(50, |t|/pi)
    leading terms (so the correction series converges geometrically with
    ratio <= 1/4) and phases t*log(n) reduced in double-double.
    """
    s = np.atleast_1d(np.asarray(s, dtype=np.complex128))
    out = np.empty(s.shape, dtype=np.complex128)
    if s.size == 0:
        return out
    if np.any(np.abs(s - 1) < 1e-8):
        raise DomainError("zeta has a pole at s = 1")
    if np.max(np.abs(s.imag)) > ZETA_MANY_T_CAP:
        raise ResourceError(f"|t| above {ZETA_MANY_T_CAP:g} not supported by the bulk evaluator")
    flat = s.ravel()
    order = np.argsort(np.abs(flat.imag), kind="stable")
    res = np.empty(flat.size, dtype=np.complex128)
    for start in range(0, flat.size, chunk):
        idx = order[start : start + chunk]
        res[idx] = _zeta_chunk(flat[idx])
    out[...] = res.reshape(s.shape)
    return out


def _zeta_chunk(s: np.ndarray) -> np.ndarray:
    N = _bulk_terms(np.max(np.abs(s.imag)))
    hi, lo = LOG_TABLE.get(N)
    sigma = s.real[:, None]
    t = s.imag[:, None]
    n = np.arange(1, N, dtype=np.float64)
    logn = np.log(n)
    weights = np.exp(-sigma * logn[None, :])
    phase = reduced_phase(t, hi[None, 1:N], lo[None, 1:N])
    head = np.sum(weights * np.conj(unit_phasor(phase)), axis=1)

    sig = s.real
    tt = s.imag
    Ns = np.exp(-sig * math.log(N)) * np.conj(unit_phasor(reduced_phase(tt, hi[N], lo[N])))
    total = head + N * Ns / (s - 1) + Ns / 2
    term = _BERN_COEFF[0] * s * Ns / N
    total = total + term
    for j in range(2, _BERN_COEFF.size + 1):
        term = term * (s + 2 * j - 3) * (s + 2 * j - 2) / (N * N) * (_BERN_COEFF[j - 1] / _BERN_COEFF[j - 2])
        total = total + term
        bound = np.abs(term) * np.abs(s + 2 * j - 1) / np.maximum(sig + 2 * j - 1, 1e-300)
        if np.all(bound < 1e-17 * np.maximum(1.0, np.abs(total))):
            return total
    raise ResourceError("bulk Euler-Maclaurin correction series did not converge")


def zeta_sq_critical(t) -> np.ndarray:
    """|zeta(1/2 + it)|^2 for an array of t, from :func:`zeta_many`."""
    t = np.asarray(t, dtype=np.float64)
    z = zeta_many(0.5 + 1j * t)
    return z.real ** 2 + z.imag ** 2


def afe_required_digits(t: float) -> float:
    """Phase-precision requirement log10(t log t) + 20 for the n^{-it} factors."""
    return math.log10(t * max(math.log(t), 1.0)) + 20


def _check_afe_args(t: float, table: DivisorTable):
    if t < 2 * math.pi:
        raise DomainError(f"the approximate functional equation needs t >= 2*pi, got {t}")
    need = afe_required_digits(t)
    if need > PHASE_DIGITS:
        raise PrecisionError(
            f"t={t:g} needs {need:.1f} phase digits, {PHASE_DIGITS} available",
            required_digits=need, available_digits=PHASE_DIGITS)
    if t / (2 * math.pi) > table.limit:
        raise OutOfRangeError(f"t/2pi = {t / (2 * math.pi)} exceeds table limit {table.limit}")


def _chi_half_minus(t: float) -> complex:
    return complex(chi(PrecisionComplex(mp.mpf(0.5), -mp.mpf(t), 30)))


def zeta_sq_critical_approx(t: float, table: DivisorTable) -> float:
    """2 Re[chi(1/2 - it) * sum_{n <= t/2pi} d(n) n^{-1/2-it}]."""
    t = float(t)
    _check_afe_args(t, table)
    M = int(math.floor(t / (2 * math.pi)))
    hi, lo = LOG_TABLE.get(M)
    phase = reduced_phase(t, hi[1 : M + 1], lo[1 : M + 1])
    terms = table.weights(M) * np.conj(unit_phasor(phase))
    S = complex(math.fsum(terms.real), math.fsum(terms.imag))
    return 2.0 * (_chi_half_minus(t) * S).real


def zeta_sq_critical_approx_many(ts, table: DivisorTable) -> np.ndarray:
    return np.array([zeta_sq_critical_approx(t, table) for t in np.asarray(ts, dtype=float)])


def motohashi_residual(t, table: DivisorTable, digits: int = 30) -> mp.mpf:
    """-sqrt(2) x^{-1/2} delta(x) with x = t/2pi: leading part of chi(1-s) R(s; t/2pi)."""
    with mp.workdps(digits + 5):
        x = mp.mpf(t) / (2 * mp.pi)
        xr = mp.nint(x)
        # t given as 2*pi*n at the caller's precision counts as integral x
        if abs(x - xr) < mp.mpf(10) ** -12:
            x = xr
        if x < 1:
            raise DomainError(f"motohashi_residual needs t >= 2*pi, got {t}")
        if x > table.limit:
            raise OutOfRangeError(f"t/2pi = {x} exceeds table limit {table.limit}")
        return -mp.sqrt(2) * delta(x, table, digits) / mp.sqrt(x)


def motohashi_residual_many(ts, table: DivisorTable) -> np.ndarray:
    """Float64 :func:`motohashi_residual` for an array of float ``t``."""
    x = np.asarray(ts, dtype=np.float64) / (2 * math.pi)
    return -math.sqrt(2) * delta_float(x, table) / np.sqrt(x)
