import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zetamoment.divisor import (
    EULER_GAMMA,
    _euler_gamma_series,
    delta,
    delta_extreme_ratio,
    delta_float,
    divisor_sieve,
    divisor_sum_halved,
)
from zetamoment.errors import DomainError, OutOfRangeError, ResourceError


def naive_d(n):
    return sum(1 for j in range(1, n + 1) if n % j == 0)


def test_small_tables():
    assert list(divisor_sieve(1).values) == [1]
    t = divisor_sieve(12)
    assert t.d(12) == 6
    assert [t.d(n) for n in range(1, 13)] == [naive_d(n) for n in range(1, 13)]


def test_hyperbola_identity_1e6():
    N = 10 ** 6
    t = divisor_sieve(N)
    assert t.D(N) == sum(N // j for j in range(1, N + 1))


def test_hyperbola_identity_every_n():
    t = divisor_sieve(3000)
    for n in range(1, 3001):
        assert t.D(n) == sum(n // j for j in range(1, n + 1))


def test_table_is_read_only():
    t = divisor_sieve(10)
    with pytest.raises(ValueError):
        t.values[0] = 5


def test_sieve_cap():
    with pytest.raises(ResourceError):
        divisor_sieve(100, cap=50)
    with pytest.raises(DomainError):
        divisor_sieve(0)


def test_halved_sum_examples(table):
    assert divisor_sum_halved(4, table) == 6.5
    assert divisor_sum_halved(4.5, table) == 8
    assert divisor_sum_halved(1, table) == 0.5
    assert divisor_sum_halved(mp.mpf(4), table) == 6.5
    with pytest.raises(OutOfRangeError):
        divisor_sum_halved(table.limit + 1, table)


def test_gamma_literal_matches_series():
    with mp.workdps(45):
        assert abs(_euler_gamma_series(40) - EULER_GAMMA) < mp.mpf(10) ** -38
        assert abs(EULER_GAMMA - mp.euler) < mp.mpf(10) ** -40


def test_delta_examples(table):
    with mp.workdps(40):
        assert abs(delta(1, table) - (mp.mpf(5) / 4 - 2 * mp.euler)) < mp.mpf(10) ** -28
        ref = mp.mpf(6.5) - 4 * (mp.log(4) + 2 * mp.euler - 1) - mp.mpf(1) / 4
        assert abs(delta(4, table) - ref) < mp.mpf(10) ** -28
    with pytest.raises(DomainError):
        delta(0.5, table)


@given(st.integers(min_value=2, max_value=20_000))
@settings(max_examples=60, deadline=None)
def test_delta_jump_is_d(table, n):
    eps = mp.mpf(10) ** -20
    with mp.workdps(40):
        jump = delta(mp.mpf(n) + eps, table, 40) - delta(mp.mpf(n) - eps, table, 40)
    assert abs(jump - table.d(n)) < 1e-15
    # the halved value sits midway between the one-sided limits
    mid = delta(n, table, 40)
    assert abs(mid - (delta(mp.mpf(n) + eps, table, 40) + delta(mp.mpf(n) - eps, table, 40)) / 2) < 1e-15


@given(st.floats(min_value=1.0, max_value=3.0e5, allow_nan=False))
@settings(max_examples=100, deadline=None)
def test_delta_float_matches_mp(table, x):
    assert abs(delta_float(np.array([x]), table)[0] - float(delta(x, table))) < 1e-9 * max(1.0, x)


def test_delta_cube_root_scan_stable(table):
    r1 = delta_extreme_ratio(50_000, table)
    r2 = delta_extreme_ratio(100_000, table)
    r3 = delta_extreme_ratio(200_000, table)
    assert math.isfinite(r1)
    assert r2 / r1 <= 1.2 and r3 / r2 <= 1.2
