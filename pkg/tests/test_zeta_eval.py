import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zetamoment.errors import DomainError, OutOfRangeError, PrecisionError, ResourceError
from zetamoment.precision import PrecisionComplex
from zetamoment.divisor import divisor_sieve
from zetamoment.zeta_eval import (
    chi,
    motohashi_residual,
    motohashi_residual_many,
    zeta_many,
    zeta_reference,
    zeta_sq_critical,
    zeta_sq_critical_approx,
)


def test_chi_at_half_is_one():
    v = chi(PrecisionComplex(0.5, 0, 30))
    assert abs(v.value - 1) < mp.mpf(10) ** -28
    assert v.digits == 30


def test_chi_unimodular_on_critical_line():
    assert abs(abs(chi(PrecisionComplex(0.5, 50, 30))) - 1) < mp.mpf(10) ** -28


def test_chi_asymptotic_mode():
    s = PrecisionComplex(0.5, 1000, 30)
    exact = chi(s).value
    approx = chi(s, asymptotic=True).value
    assert abs(exact - approx) / abs(exact) <= 10 / 1000
    with pytest.raises(DomainError):
        chi(PrecisionComplex(0.5, 0.5, 30), asymptotic=True)


def test_chi_pole_refused():
    with pytest.raises(DomainError):
        chi(PrecisionComplex(3, 0, 30))


@given(st.floats(0.01, 0.99), st.floats(2, 1000))
@settings(max_examples=25)
def test_chi_reflection_and_functional_equation(sigma, t):
    s = PrecisionComplex(sigma, t, 25)
    with mp.workdps(40):
        one_minus = PrecisionComplex(1 - mp.mpf(sigma), -mp.mpf(t), 25)
        assert abs(chi(s).value * chi(one_minus).value - 1) < mp.mpf(10) ** -20
        z1 = zeta_reference(one_minus, 25).value
        z2 = chi(one_minus).value * zeta_reference(s, 25).value
        assert abs(z1 - z2) < mp.mpf(10) ** -18 * max(1, abs(z1))


def test_zeta_reference_classical_values():
    with mp.workdps(40):
        assert abs(zeta_reference(2, 30).value - mp.pi ** 2 / 6) < mp.mpf(10) ** -29
        assert abs(zeta_reference(0, 30).value + mp.mpf(1) / 2) < mp.mpf(10) ** -29
    with pytest.raises(DomainError):
        zeta_reference(1)
    with pytest.raises(ResourceError):
        zeta_reference(2, 5000)


def _hardy_z(t):
    # Z(t) = e^{i theta(t)} zeta(1/2 + it) is real
    with mp.workdps(30):
        return (mp.expj(mp.siegeltheta(t)) * zeta_reference(mp.mpc(0.5, t), 25).value).real


def test_first_zero_by_sign_change():
    lo, hi = mp.mpf(14), mp.mpf(14.3)
    assert _hardy_z(lo) * _hardy_z(hi) < 0
    for _ in range(60):
        mid = (lo + hi) / 2
        if _hardy_z(lo) * _hardy_z(mid) <= 0:
            hi = mid
        else:
            lo = mid
    assert abs(lo - mp.mpf("14.1347251417346937904572519836")) < 1e-12
    assert abs(zeta_reference(mp.mpc(0.5, lo), 25)) < 1e-6
    assert abs(zeta_reference(mp.mpc(0.5, "14.1347251417"), 25)) < 1e-6


@given(st.floats(0.05, 3.0), st.floats(-500, 500))
@settings(max_examples=30)
def test_reference_digit_stability(sigma, t):
    if abs(complex(sigma, t) - 1) < 1e-3:
        return
    a = zeta_reference(mp.mpc(sigma, t), 20).value
    b = zeta_reference(mp.mpc(sigma, t), 30).value
    assert abs(a - b) <= mp.mpf(10) ** -20 * max(1, abs(b))


def test_bulk_against_mpmath():
    rng = np.random.default_rng(1)
    s = rng.uniform(0.1, 0.9, 40) + 1j * rng.uniform(0, 2e4, 40)
    got = zeta_many(s)
    for z, v in zip(s, got):
        ref = complex(mp.zeta(mp.mpc(z.real, z.imag)))
        assert abs(v - ref) <= 1e-11 * max(1.0, abs(ref))


def test_bulk_caps():
    with pytest.raises(ResourceError):
        zeta_many([0.5 + 3e5j])
    with pytest.raises(DomainError):
        zeta_many([1.0 + 0j])
    assert zeta_many([]).size == 0


def test_zeta_sq_critical_matches_reference():
    t = np.array([1.0, 14.1347251417, 100.0, 1234.5])
    ref = [float(abs(zeta_reference(mp.mpc(0.5, x), 20).value) ** 2) for x in t]
    assert np.allclose(zeta_sq_critical(t), ref, rtol=1e-11, atol=1e-20)


def test_afe_at_t100(table):
    ref = float(abs(zeta_reference(mp.mpc(0.5, 100), 30).value) ** 2)
    assert abs(zeta_sq_critical_approx(100.0, table) - ref) <= 5 * 100 ** (-1 / 6)


def test_afe_single_term(table):
    t = 2 * math.pi
    expect = 2 * complex(chi(PrecisionComplex(0.5, -t, 30))).real
    assert zeta_sq_critical_approx(t, table) == pytest.approx(expect, rel=1e-14)


def test_afe_domain_checks(table):
    with pytest.raises(DomainError):
        zeta_sq_critical_approx(5.0, table)
    with pytest.raises(OutOfRangeError):
        zeta_sq_critical_approx(1e4, divisor_sieve(100))
    with pytest.raises(PrecisionError) as info:
        zeta_sq_critical_approx(1e12, table)
    assert info.value.required_digits > info.value.available_digits


def test_motohashi_examples(table):
    from zetamoment.divisor import delta
    with mp.workdps(40):
        r = motohashi_residual(2 * mp.pi, table)
        assert abs(r + mp.sqrt(2) * delta(1, table)) < mp.mpf(10) ** -25
        t = 8 * mp.pi ** 2
        x = 4 * mp.pi
        expect = -mp.sqrt(2) * x ** -0.5 * delta(x, table)
        assert abs(motohashi_residual(t, table) - expect) < mp.mpf(10) ** -25
    assert motohashi_residual_many(np.array([float(8 * mp.pi ** 2)]), table)[0] == pytest.approx(
        float(expect), rel=1e-12)
    with pytest.raises(DomainError):
        motohashi_residual(3.0, table)


def test_afe_defect_scaling(table, calibration):
    ts = np.geomspace(50, 5000, 12)
    for t in ts:
        ref = float(abs(zeta_reference(mp.mpc(0.5, t), 20).value) ** 2)
        defect = ref - zeta_sq_critical_approx(t, table) - float(motohashi_residual(t, table))
        assert abs(defect) * t ** 0.25 <= calibration["afe.t14_const"]
