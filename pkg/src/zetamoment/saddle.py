"""Oscillatory integrals of e(g_k) and the S1/S2 decomposition of the moment sum.

Phases are f(x) = (x/2pi) log(x / (2 pi e m)) and g_k(x) = f(x) - k x,
measured in cycles, so that the integrand is e(g_k(x)) = exp(2 pi i g_k(x)).
g_k is convex with its unique stationary point at x0 = 2 pi m e^{2 pi k}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from ._phase import reduced_phase, split_mpf, unit_phasor
from .divisor import DivisorTable
from .errors import DomainError, PrecisionError, ResourceError
from .parallel import exact_csum, ordered_map
from .precision import PrecisionComplex

QUAD_B_CAP = 1.0e7
QUAD_PANEL_CAP = 4_000_000
DEFAULT_THETA = 0.05
S1_T_CAP = 3.0e4
# accepted panels must not turn by more than pi/4 radians
MAX_PANEL_CYCLES = 0.125
_EPS64 = float(np.finfo(np.float64).eps)
_EPS_LD = float(np.finfo(np.longdouble).eps)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
# nodes and weights mapped to [0, 1]
_GL_T = (_GL_X + 1) / 2
_GL_W = _GL_W / 2


def _ld(fn) -> np.longdouble:
    """Extended-precision value of the mpmath expression ``fn()``."""
    with mp.workdps(30):
        return np.longdouble(mp.nstr(fn(), 25))


_LD_INV_2PI = _ld(lambda: 1 / (2 * mp.pi))


@dataclass(frozen=True)
class OscillatorSpec:
    """Phase parameters (m, k) and integration range [a, b]."""

    m: int
    k: int
    a: float
    b: float
    theta: float = DEFAULT_THETA

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m}")
        if int(self.k) != self.k or self.k < 0:
            raise DomainError(f"k must be a nonnegative integer, got {self.k}")
        if not 0 < self.a <= self.b:
            raise DomainError(f"need 0 < a <= b, got [{self.a}, {self.b}]")
        if not 0 < self.theta:
            raise DomainError(f"theta must be positive, got {self.theta}")

    @property
    def saddle(self) -> float:
        return 2 * math.pi * self.m * math.exp(2 * math.pi * self.k)

    def _log_const(self) -> np.longdouble:
        return _ld(lambda: mp.log(2 * mp.pi * mp.e * self.m))

    def phase(self, x) -> np.ndarray:
        """g_k(x) in cycles, unreduced, in extended precision."""
        x = np.asarray(x, dtype=np.longdouble)
        return x * _LD_INV_2PI * (np.log(x) - self._log_const()) - np.longdouble(self.k) * x

    def slope(self, x) -> np.ndarray:
        """g_k'(x) = (1/2pi) log(x / 2 pi m) - k."""
        x = np.asarray(x, dtype=np.float64)
        return np.log(x / (2 * math.pi * self.m)) / (2 * math.pi) - self.k


def phase_eval(spec: OscillatorSpec, x, digits: int = 30) -> tuple[mp.mpf, mp.mpf]:
    """(f(x), g_k(x)) at ``digits`` precision."""
    with mp.workdps(digits + 5):
        x = mp.mpf(x)
        if x <= 0:
            raise DomainError(f"x must be positive, got {x}")
        f = x / (2 * mp.pi) * mp.log(x / (2 * mp.pi * mp.e * spec.m))
        return +f, f - spec.k * x


def _e(phase_ld) -> np.ndarray:
    r = phase_ld - np.floor(phase_ld)
    ang = 2.0 * np.pi * r.astype(np.float64)
    return np.cos(ang) + 1j * np.sin(ang)


def _offset_phase(spec: OscillatorSpec, c, u):
    # g_k(c + u) - g_k(c) in float64; log1p keeps it free of cancellation
    lc = np.log(c / (2 * math.pi * math.e * spec.m))
    return ((c + u) * np.log1p(u / c) + u * lc) / (2 * math.pi) - spec.k * u


def _gl(spec: OscillatorSpec, lo, hi) -> np.ndarray:
    # nodes are offsets from the exactly representable lo, so each panel is exactly [lo, hi]
    width = hi - lo
    base = _e(spec.phase(lo))
    u = width[:, None] * _GL_T[None, :]
    ang = 2.0 * np.pi * _offset_phase(spec, lo[:, None], u)
    vals = np.cos(ang) + 1j * np.sin(ang)
    return width * base * (vals @ _GL_W)


def _turn(spec: OscillatorSpec, lo, hi) -> np.ndarray:
    return np.abs(_offset_phase(spec, lo, hi - lo))


def _monotone_pieces(spec: OscillatorSpec, a: float, b: float) -> list[tuple[float, float]]:
    x0 = spec.saddle
    if a < x0 < b:
        return [(a, x0), (x0, b)]
    return [(a, b)]


def oscillatory_integral(spec: OscillatorSpec, tol: float = 1e-8) -> PrecisionComplex:
    """Integral of e(g_k(x)) over [a, b] by adaptive 16-point Gauss-Legendre panels.

    Panels are refined until each turns by less than pi/4 radians and its
    estimate agrees with the two-half estimate to within its share of
    ``tol``.  The share never drops below the rounding level of the phase
    arithmetic, so for ranges near 10^6 and beyond the effective target is
    a few ulps of the phase times (b - a) rather than ``tol``.
    """
    a, b = float(spec.a), float(spec.b)
    if b > QUAD_B_CAP:
        raise ResourceError(f"upper limit {b:g} exceeds quadrature cap {QUAD_B_CAP:g}")
    if a == b:
        return PrecisionComplex.from_value(0)
    los, his = [], []
    for u, v in _monotone_pieces(spec, a, b):
        cycles = float(abs(spec.phase(v) - spec.phase(u)))
        n = max(1, math.ceil(cycles / MAX_PANEL_CYCLES))
        edges = np.linspace(u, v, n + 1)
        los.append(edges[:-1])
        his.append(edges[1:])
    lo = np.concatenate(los)
    hi = np.concatenate(his)
    length = b - a
    # per unit length, the coarse/fine comparison cannot resolve less than the
    # rounding of the extended-precision base phase plus a few float64 ulps
    big = float(max(abs(spec.phase(a)), abs(spec.phase(b)), abs(spec.phase(np.clip(spec.saddle, a, b)))))
    floor = 64 * _EPS64 + 16 * 2 * math.pi * _EPS_LD * big
    accepted = []
    for _ in range(60):
        if lo.size == 0:
            break
        if lo.size > QUAD_PANEL_CAP:
            raise ResourceError("quadrature panel count exceeded its cap")
        mid = (lo + hi) / 2
        coarse = _gl(spec, lo, hi)
        fine = _gl(spec, lo, mid) + _gl(spec, mid, hi)
        turn = _turn(spec, lo, hi)
        local_tol = max(tol / length, floor) * (hi - lo)
        ok = (np.abs(coarse - fine) <= local_tol) & (turn <= MAX_PANEL_CYCLES)
        accepted.append(fine[ok])
        bad = ~ok
        lo = np.concatenate([lo[bad], mid[bad]])
        hi = np.concatenate([mid[bad], hi[bad]])
    else:
        raise ResourceError("adaptive quadrature did not converge")
    return PrecisionComplex.from_value(exact_csum(np.concatenate(accepted)))


def resonant_phase_digits(m: int, k: int) -> int:
    return math.ceil(2 * math.pi * k / math.log(10) + math.log10(m) + 20)


def saddle_point_value(m: int, k: int, endpoint: bool = False,
                       digits: int | None = None) -> PrecisionComplex:
    """Stationary-phase main term e^{i pi/4} e(-m e^{2 pi k}) 2 pi e^{pi k} sqrt(m).

    With ``endpoint=True`` the saddle sits on an endpoint of the range and
    only half the Gaussian is picked up, giving e^{i pi/4} pi sqrt(m) for k=0.
    """
    if m < 1 or k < 0:
        raise DomainError(f"need m >= 1 and k >= 0, got m={m}, k={k}")
    need = resonant_phase_digits(m, k)
    if digits is None:
        digits = need
    elif digits < need:
        raise PrecisionError(f"saddle value for k={k} needs {need} digits, got {digits}",
                             required_digits=need, available_digits=digits)
    with mp.workdps(digits + 10):
        res = m * mp.exp(2 * mp.pi * k)
        res = res - mp.floor(res)
        amp = 2 * mp.pi * mp.exp(mp.pi * k) * mp.sqrt(m)
        if endpoint:
            amp /= 2
        value = mp.expjpi(mp.mpf(1) / 4) * mp.expj(-2 * mp.pi * res) * amp
    return PrecisionComplex.from_value(value, max(15, min(digits, 30)))


def saddle_error_scale(T: float, x0: float, endpoint: bool = False) -> float:
    """T/(2T - x0) + T/(x0 - T) + 1; the T/(x0 - T) term is dropped for an endpoint saddle."""
    if endpoint:
        return T / (2 * T - x0) + 1
    return T / (2 * T - x0) + T / (x0 - T) + 1


@dataclass(frozen=True)
class DerivativeTestResult:
    first_bound: float | None
    second_bound: float
    actual: float
    first_applicable: bool
    note: str = ""


def first_derivative_bound(m: int, k: int, T: float) -> float | None:
    """8 pi / min_{[T,2T]} |log(x / x0)|, or None if x0 lies in [T, 2T]."""
    x0 = 2 * math.pi * m * math.exp(2 * math.pi * k)
    if T <= x0 <= 2 * T:
        return None
    lam = min(abs(math.log(T / x0)), abs(math.log(2 * T / x0)))
    return 8 * math.pi / lam


def second_derivative_bound(T: float) -> float:
    return 16 * math.sqrt(math.pi * T)


def derivative_test_bounds(spec: OscillatorSpec, T: float) -> DerivativeTestResult:
    """Both derivative-test bounds for the integral of e(g_k) over [T, 2T] and its actual size."""
    first = first_derivative_bound(spec.m, spec.k, T)
    actual = float(abs(oscillatory_integral(OscillatorSpec(spec.m, spec.k, T, 2 * T, spec.theta))))
    note = "" if first is not None else "stationary point inside [T, 2T]: first-derivative test inapplicable"
    return DerivativeTestResult(first, second_derivative_bound(T), actual, first is not None, note)


def _nlogn_phase(n: np.ndarray) -> np.ndarray:
    """n log(n) / 2pi mod 1 for integer-valued float ``n``."""
    nl = n.astype(np.longdouble)
    v = nl * np.log(nl) * _LD_INV_2PI
    return (v - np.floor(v)).astype(np.float64)


def _linear_coeff(m: int) -> tuple[float, float]:
    with mp.workdps(40):
        return split_mpf(mp.log(2 * mp.pi * mp.e * m) / (2 * mp.pi))


def _direct_phase_sum(m: int, lo: float, hi: float, nlogn=None) -> complex:
    """sum over integers lo < n <= hi of e(f(n)); e(g_k(n)) is the same for integer n."""
    n = np.arange(math.floor(lo) + 1, math.floor(hi) + 1, dtype=np.float64)
    if n.size == 0:
        return 0j
    base = _nlogn_phase(n) if nlogn is None else nlogn
    c_hi, c_lo = _linear_coeff(m)
    return exact_csum(unit_phasor(base - reduced_phase(n, c_hi, c_lo)))


@dataclass(frozen=True)
class PoissonDefect:
    defect: float
    direct: complex
    integrals: complex
    ks: tuple[int, ...]


def poisson_window(m: int, a: float, b: float, theta: float) -> tuple[int, ...]:
    """Integers k with f'(a) - theta < k < f'(b) + theta."""
    alpha = math.log(a / (2 * math.pi * m)) / (2 * math.pi)
    beta = math.log(b / (2 * math.pi * m)) / (2 * math.pi)
    k_lo = math.floor(alpha - theta) + 1
    k_hi = math.ceil(beta + theta) - 1
    return tuple(range(k_lo, k_hi + 1))


def _poisson(m: int, a: float, b: float, theta: float) -> PoissonDefect:
    if not 0 < theta <= 0.1:
        raise DomainError(f"theta must lie in (0, 0.1], got {theta}")
    ks = poisson_window(m, a, b, theta)
    direct = _direct_phase_sum(m, a, b)
    total = 0j
    for k in ks:
        if k < 0:
            raise DomainError("negative k in the Poisson window; need m <= T/pi")
        total += complex(oscillatory_integral(OscillatorSpec(m, k, a, b, theta)))
    return PoissonDefect(abs(direct - total), direct, total, ks)


def truncated_poisson_defect(m: int, T: float, theta: float = DEFAULT_THETA) -> PoissonDefect:
    """Defect of replacing sum_{T<n<=2T} e(f(n)) by the integrals over the k-window."""
    if T < 10:
        raise DomainError(f"need T >= 10, got {T}")
    if m > T / math.pi:
        raise DomainError(f"need m <= T/pi, got m={m}, T={T}")
    return _poisson(m, T, 2 * T, theta)


def truncated_poisson_defect_s2(m: int, T: float, theta: float = DEFAULT_THETA) -> PoissonDefect:
    """The same defect on (2 pi m, 2T], the range used for the S2 sum."""
    if T < 10:
        raise DomainError(f"need T >= 10, got {T}")
    if not T / (2 * math.pi) < m <= T / math.pi:
        raise DomainError(f"need T/2pi < m <= T/pi, got m={m}, T={T}")
    return _poisson(m, 2 * math.pi * m, 2 * T, theta)


CASES = ("i", "ii", "iii", "iv", "v")


def classify_m(m: int, k: int, T: float) -> str:
    """Which of the five m-intervals around T/2pi e^{-2pi k} and T/pi e^{-2pi k} holds m."""
    A = T / (2 * math.pi) * math.exp(-2 * math.pi * k)
    B = 2 * A
    if m <= A - 1:
        return "i"
    if m < A + 1:
        return "ii"
    if m <= B - 1:
        return "iii"
    if m < B + 1:
        return "iv"
    return "v"


@dataclass
class DecompositionRow:
    case: str
    k: int
    m_lo: int
    m_hi: int
    count: int
    value: complex
    bound: float

    CSV_HEADER = ("case", "k", "m_lo", "m_hi", "count", "re", "im", "bound", "actual")

    @property
    def actual(self) -> float:
        return abs(self.value)

    def as_tuple(self):
        return (self.case, self.k, self.m_lo, self.m_hi, self.count,
                self.value.real, self.value.imag, self.bound, self.actual)


@dataclass
class S1Decomposition:
    T: float
    theta: float
    rows: list[DecompositionRow]
    case_totals: dict[str, complex]
    total: complex
    direct: complex = field(default=0j)

    def case_abs(self, case: str) -> float:
        return abs(self.case_totals[case])


def s1_jobs(T: float, table: DivisorTable, theta: float = DEFAULT_THETA):
    """(case, k, m) triples entering the exchanged S1 sum."""
    k_max = math.floor(math.log(T / math.pi) / (2 * math.pi) + theta)
    m_cap = math.floor(T / (2 * math.pi))
    if m_cap > table.limit:
        raise DomainError(f"T/2pi = {m_cap} exceeds table limit {table.limit}")
    jobs = []
    for k in range(0, k_max + 1):
        lo = T / (2 * math.pi) * math.exp(-2 * math.pi * (k + theta))
        hi = T / math.pi * math.exp(-2 * math.pi * (k - theta))
        m_first = max(1, math.floor(lo) + 1)
        m_last = min(m_cap, math.ceil(hi) - 1)
        for m in range(m_first, m_last + 1):
            jobs.append((classify_m(m, k, T), k, m))
    return jobs


def s1_contributions(T: float, table: DivisorTable, theta: float = DEFAULT_THETA,
                     threads=1, with_direct: bool = True) -> S1Decomposition:
    """The exchanged S1 sum split over the five m-intervals for every k.

    Interior saddles (case iii) use the closed-form stationary-phase value,
    every other (m, k) pair its quadrature.  ``direct`` is the S1 sum
    computed straight from its definition, for comparison.
    """
    if T > S1_T_CAP:
        raise ResourceError(f"T={T:g} exceeds the S1 cost cap {S1_T_CAP:g}")
    if T < 10:
        raise DomainError(f"need T >= 10, got {T}")
    jobs = s1_jobs(T, table, theta)

    def run(job):
        case, k, m = job
        w = table.d(m) / math.sqrt(m)
        if case == "iii":
            val = complex(saddle_point_value(m, k))
            bound = math.nan
        else:
            val = complex(oscillatory_integral(OscillatorSpec(m, k, T, 2 * T, theta)))
            if case in ("i", "v"):
                fb = first_derivative_bound(m, k, T)
                bound = math.nan if fb is None else w * fb
            else:
                bound = w * second_derivative_bound(T)
        return w * val, bound

    results = ordered_map(run, jobs, threads)
    groups: dict[tuple[str, int], list[int]] = {}
    for i, (case, k, m) in enumerate(jobs):
        groups.setdefault((case, k), []).append(i)
    rows = []
    for (case, k), idx in sorted(groups.items(), key=lambda kv: (kv[0][1], CASES.index(kv[0][0]))):
        vals = [results[i][0] for i in idx]
        bounds = [results[i][1] for i in idx]
        rows.append(DecompositionRow(case, k, jobs[idx[0]][2], jobs[idx[-1]][2], len(idx),
                                     exact_csum(vals), math.fsum(bounds)))
    case_totals = {c: exact_csum([r.value for r in rows if r.case == c] or [0j]) for c in CASES}
    total = exact_csum([r.value for r in rows] or [0j])
    direct = s1_direct(T, table, threads) if with_direct else complex("nan")
    return S1Decomposition(T, theta, rows, case_totals, total, direct)


def s1_direct(T: float, table: DivisorTable, threads=1) -> complex:
    """sum_{m <= T/2pi} d(m) m^{-1/2} sum_{T < n <= 2T} e(f(n)) from the definition."""
    m_cap = math.floor(T / (2 * math.pi))
    nlogn = _nlogn_phase(np.arange(math.floor(T) + 1, math.floor(2 * T) + 1, dtype=np.float64))

    def run(m):
        return table.d(m) / math.sqrt(m) * _direct_phase_sum(m, T, 2 * T, nlogn)

    return exact_csum(ordered_map(run, range(1, m_cap + 1), threads) or [0j])


@dataclass(frozen=True)
class S2Result:
    T: float
    computed: complex
    predicted: complex
    divisor_sum: int

    @property
    def difference(self) -> float:
        return abs(self.computed - self.predicted)


def s2_main(T: float, table: DivisorTable, threads=1) -> S2Result:
    """S2 by quadrature against its main term e^{i pi/4} pi sum_{T/2pi < m <= T/pi} d(m)."""
    if T > S1_T_CAP:
        raise ResourceError(f"T={T:g} exceeds the S2 cost cap {S1_T_CAP:g}")
    m_lo = math.floor(T / (2 * math.pi)) + 1
    m_hi = math.floor(T / math.pi)
    if m_hi > table.limit:
        raise DomainError(f"T/pi exceeds table limit {table.limit}")
    ms = list(range(m_lo, m_hi + 1))

    def run(m):
        a = 2 * math.pi * m
        if a >= 2 * T:
            return 0j
        return table.d(m) / math.sqrt(m) * complex(oscillatory_integral(OscillatorSpec(m, 0, a, 2 * T)))

    computed = exact_csum(ordered_map(run, ms, threads) or [0j])
    dsum = table.D(m_hi) - table.D(m_lo - 1)
    predicted = complex(mp.expjpi(mp.mpf(1) / 4) * mp.pi * dsum)
    return S2Result(T, computed, predicted, dsum)
