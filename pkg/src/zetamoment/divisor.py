"""Divisor function: sieve, halved prefix sums and the divisor-problem error term."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .errors import DomainError, OutOfRangeError, ResourceError

# Euler's constant, 50 significant digits
EULER_GAMMA_STR = "0.57721566490153286060651209008240243104215933593992"

SIEVE_CAP = 2 ** 27


def _euler_gamma_series(digits: int = 40) -> mp.mpf:
    # H_n - log n - 1/(2n) + sum B_{2j} / (2j n^{2j}), truncated once terms drop below 10^-(digits+5)
    with mp.workdps(digits + 10):
        n = 60
        h = mp.fsum(mp.mpf(1) / j for j in range(1, n + 1))
        total = h - mp.log(n) - mp.mpf(1) / (2 * n)
        eps = mp.mpf(10) ** (-(digits + 5))
        j = 1
        while True:
            term = mp.bernoulli(2 * j) / (2 * j * mp.mpf(n) ** (2 * j))
            total += term
            if abs(term) < eps:
                break
            j += 1
        return +total


def _check_euler_gamma() -> mp.mpf:
    with mp.workdps(60):
        literal = mp.mpf(EULER_GAMMA_STR)
        if abs(literal - _euler_gamma_series(40)) > mp.mpf(10) ** -40:
            raise RuntimeError("stored Euler constant failed its self-check")
    return literal


EULER_GAMMA = _check_euler_gamma()
EULER_GAMMA_FLOAT = float(EULER_GAMMA)


@dataclass(frozen=True, eq=False)
class DivisorTable:
    """Values of d(n) and their prefix sums for 1 <= n <= limit.

    ``values[n - 1] == d(n)`` and ``prefix[n - 1] == d(1) + ... + d(n)``;
    use :meth:`d` and :meth:`D` for 1-based access.
    """

    limit: int
    values: np.ndarray = field(repr=False)
    prefix: np.ndarray = field(repr=False)

    def d(self, n: int) -> int:
        if not 1 <= n <= self.limit:
            raise OutOfRangeError(f"n={n} outside table range [1, {self.limit}]")
        return int(self.values[n - 1])

    def D(self, n: int) -> int:
        """Sum of d(m) over 1 <= m <= n; D(0) = 0."""
        if n == 0:
            return 0
        if not 1 <= n <= self.limit:
            raise OutOfRangeError(f"n={n} outside table range [0, {self.limit}]")
        return int(self.prefix[n - 1])

    def weights(self, n_max: int, sigma: float = 0.5) -> np.ndarray:
        """d(n) / n**sigma for 1 <= n <= n_max as float64."""
        if n_max > self.limit:
            raise OutOfRangeError(f"n_max={n_max} exceeds table limit {self.limit}")
        n = np.arange(1, n_max + 1, dtype=np.float64)
        return self.values[:n_max] / n ** sigma


def divisor_sieve(N: int, cap: int = SIEVE_CAP) -> DivisorTable:
    """Build the table of d(n) for n <= N by the additive sieve."""
    if N < 1:
        raise DomainError(f"N must be positive, got {N}")
    if N > cap:
        raise ResourceError(f"divisor sieve of size {N} exceeds the cap of {cap} entries")
    d = np.ones(N + 1, dtype=np.int64)  # the divisor n itself
    d[0] = 0
    for j in range(1, N // 2 + 1):
        d[2 * j :: j] += 1
    values = d[1:].copy()
    prefix = np.cumsum(values)
    values.setflags(write=False)
    prefix.setflags(write=False)
    return DivisorTable(N, values, prefix)


_SHARED: DivisorTable | None = None


def shared_table(N: int) -> DivisorTable:
    """A process-wide table covering at least ``N`` (grown by doubling)."""
    global _SHARED
    if _SHARED is None or _SHARED.limit < N:
        size = N if _SHARED is None else max(N, min(2 * _SHARED.limit, SIEVE_CAP))
        _SHARED = divisor_sieve(size)
    return _SHARED


def _floor_and_integrality(x):
    """floor(x) and whether x is an integer, exactly for int/float/mpf input."""
    if isinstance(x, (int, np.integer)):
        return int(x), True
    if isinstance(x, (float, np.floating)):
        fl = math.floor(x)
        return fl, fl == x
    x = mp.mpf(x)
    fl = int(mp.floor(x))
    return fl, x == fl


def divisor_sum_halved(x, table: DivisorTable) -> float:
    """Sum of d(n) over n <= x, with the last term halved when x is an integer."""
    if x <= 0:
        raise DomainError(f"x must be positive, got {x}")
    if x > table.limit:
        raise OutOfRangeError(f"x={x} exceeds table limit {table.limit}")
    n, integral = _floor_and_integrality(x)
    total = table.D(n)
    if integral:
        return total - table.d(n) / 2
    return float(total)


def delta(x, table: DivisorTable, digits: int = 30) -> mp.mpf:
    """Error term of the Dirichlet divisor problem at real ``x >= 1``."""
    if x < 1:
        raise DomainError(f"delta requires x >= 1, got {x}")
    digits = max(digits, 30)
    with mp.workdps(digits + 5):
        s = mp.mpf(divisor_sum_halved(x, table))
        xm = mp.mpf(x)
        value = s - xm * (mp.log(xm) + 2 * EULER_GAMMA - 1) - mp.mpf(1) / 4
    return +value


def delta_float(x: np.ndarray, table: DivisorTable) -> np.ndarray:
    """Vectorised float64 version of :func:`delta` for non-integer ``x``.

    Integer inputs are still handled (halved last term); float64 suffices
    for the downstream scale x**-1/2 * delta(x).
    """
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 1):
        raise DomainError("delta requires x >= 1")
    if np.any(x > table.limit):
        raise OutOfRangeError(f"x exceeds table limit {table.limit}")
    n = np.floor(x).astype(np.int64)
    s = table.prefix[n - 1].astype(np.float64)
    s = np.where(n == x, s - table.values[n - 1] / 2.0, s)
    return s - x * (np.log(x) + 2 * EULER_GAMMA_FLOAT - 1) - 0.25


def delta_extreme_ratio(N: int, table: DivisorTable, lo: int = 2) -> float:
    """max |delta(x)| / x**(1/3) over real x in [lo, N].

    Between integers delta is smooth and decreasing, so the extremes are
    the one-sided limits at integers; those are scanned exhaustively.
    """
    if N > table.limit:
        raise OutOfRangeError(f"N={N} exceeds table limit {table.limit}")
    n = np.arange(lo, N + 1, dtype=np.float64)
    main = n * (np.log(n) + 2 * EULER_GAMMA_FLOAT - 1) + 0.25
    right = table.prefix[lo - 1 : N] - main
    left = table.prefix[lo - 2 : N - 1] - main
    scale = n ** (1.0 / 3.0)
    return float(max(np.max(np.abs(right) / scale), np.max(np.abs(left) / scale)))
