"""Discrete and continuous second moments, their main terms, and the side targets."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .divisor import EULER_GAMMA_FLOAT, DivisorTable, shared_table
from .errors import DomainError, ResourceError
from .parallel import blocks, exact_sum, ordered_map
from .precision import PrecisionComplex, as_mpc
from .zeta_eval import (
    motohashi_residual_many,
    zeta_many,
    zeta_reference,
    zeta_sq_critical,
    zeta_sq_critical_approx,
)

MODES = ("reference", "afe")
REFERENCE_T_CAP = 1.0e4
AFE_T_CAP = 1.0e5
CONTINUOUS_T_CAP = 1.0e4
FIRST_MOMENT_N_CAP = 20_000
FOURTH_MOMENT_T_CAP = 20_000
# log log log T > 0 needs T > e^e
ENVELOPE_T_FLOOR = 16.0
SIGMA_FLOOR = 0.55
_BLOCK = 256


def _table_for(T: float) -> DivisorTable:
    return shared_table(max(16, math.ceil(T / (2 * math.pi)) + 1))


def _afe_block(ns: np.ndarray, table: DivisorTable) -> np.ndarray:
    main = np.array([zeta_sq_critical_approx(t, table) for t in ns])
    return main + motohashi_residual_many(ns, table)


def critical_values(ns, mode: str = "afe", table: DivisorTable | None = None,
                    threads=1) -> np.ndarray:
    """|zeta(1/2 + in)|^2 at the given points, by oracle or by the approximate functional equation.

    The AFE needs t >= 2 pi; smaller points always use the oracle.
    """
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")
    ns = np.asarray(ns, dtype=np.float64)
    out = np.empty(ns.size)
    if ns.size == 0:
        return out
    if mode == "reference":
        parts = ordered_map(lambda b: zeta_sq_critical(ns[b[0]:b[1]]), blocks(ns.size, _BLOCK), threads)
        return np.concatenate(parts)
    table = table or _table_for(float(ns.max()))
    small = ns < 2 * math.pi
    out[small] = zeta_sq_critical(ns[small])
    big = np.flatnonzero(~small)
    parts = ordered_map(lambda b: _afe_block(ns[big[b[0]:b[1]]], table), blocks(big.size, _BLOCK), threads)
    if parts:
        out[big] = np.concatenate(parts)
    return out


def _check_budget(T: float, mode: str):
    cap = REFERENCE_T_CAP if mode == "reference" else AFE_T_CAP
    if T > cap:
        raise ResourceError(f"T={T:g} exceeds the {mode}-mode budget {cap:g}")


def discrete_terms(T: float, mode: str = "afe", start: int = 1, threads=1):
    """(n, |zeta(1/2+in)|^2) for integers start <= n <= T."""
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    if start not in (0, 1):
        raise DomainError("summation starts at n = 0 or n = 1")
    _check_budget(T, mode)
    ns = np.arange(start, math.floor(T) + 1, dtype=np.float64)
    return ns, critical_values(ns, mode, threads=threads)


def discrete_second_moment(T: float, mode: str = "afe", start: int = 1, threads=1) -> float:
    """sum_{start <= n <= T} |zeta(1/2 + in)|^2."""
    _, vals = discrete_terms(T, mode, start, threads)
    return exact_sum(vals)


_GL8 = np.polynomial.legendre.leggauss(8)
_GL16 = np.polynomial.legendre.leggauss(16)


def _gl_many(lo: np.ndarray, hi: np.ndarray, rule) -> tuple[np.ndarray, np.ndarray]:
    x, w = rule
    half = (hi - lo) / 2
    nodes = (lo + half)[:, None] + half[:, None] * x[None, :]
    return nodes, half[:, None] * w[None, :]


def _panel_integrals(lo: np.ndarray, hi: np.ndarray, tol_per_unit: float, threads=1) -> np.ndarray:
    """Integral of |zeta(1/2+it)|^2 over each [lo_i, hi_i], refined by bisection."""
    result = np.zeros(lo.size)
    owner = np.arange(lo.size)
    for _ in range(30):
        if lo.size == 0:
            return result
        n8, w8 = _gl_many(lo, hi, _GL8)
        n16, w16 = _gl_many(lo, hi, _GL16)
        nodes = np.concatenate([n8.ravel(), n16.ravel()])
        chunks = blocks(nodes.size, 4096)
        vals = np.concatenate(ordered_map(lambda b: zeta_sq_critical(nodes[b[0]:b[1]]), chunks, threads))
        coarse = np.sum(vals[: n8.size].reshape(n8.shape) * w8, axis=1)
        fine = np.sum(vals[n8.size:].reshape(n16.shape) * w16, axis=1)
        ok = np.abs(coarse - fine) <= tol_per_unit * (hi - lo)
        np.add.at(result, owner[ok], fine[ok])
        bad = ~ok
        mid = (lo[bad] + hi[bad]) / 2
        lo, hi = np.concatenate([lo[bad], mid]), np.concatenate([mid, hi[bad]])
        owner = np.concatenate([owner[bad], owner[bad]])
    raise ResourceError("continuous-moment quadrature did not converge")


def continuous_second_moments(Ts, rel_tol: float = 1e-4, threads=1) -> np.ndarray:
    """Integral of |zeta(1/2+it)|^2 over [0, T] for each T, on unit-aligned panels.

    The panel budget of each T is rel_tol * T spread evenly over [0, T];
    panels are shared between grid points.
    """
    Ts = np.asarray(Ts, dtype=np.float64)
    if Ts.size == 0:
        return Ts.copy()
    if np.any(Ts <= 0):
        raise DomainError("T must be positive")
    T_max = float(Ts.max())
    if T_max > CONTINUOUS_T_CAP:
        raise ResourceError(f"T={T_max:g} exceeds the continuous-moment budget {CONTINUOUS_T_CAP:g}")
    edges = np.union1d(np.arange(0.0, math.floor(T_max) + 1.0), Ts)
    lo, hi = edges[:-1], edges[1:]
    panel = _panel_integrals(lo, hi, rel_tol * 0.5, threads)
    return np.array([math.fsum(panel[hi <= T]) for T in Ts])


def continuous_second_moment(T: float, rel_tol: float = 1e-4, threads=1) -> float:
    return float(continuous_second_moments([T], rel_tol, threads)[0])


def main_term(T: float) -> float:
    """T log(T / 2 pi)."""
    return T * math.log(T / (2 * math.pi))


def second_main_term(T: float) -> float:
    """(2 gamma - 1) T."""
    return (2 * EULER_GAMMA_FLOAT - 1) * T


def error_envelope(T, C) -> mp.mpf:
    """T log T exp(-C log log T / log log log T), evaluated at 30 digits."""
    if C < 0:
        raise DomainError(f"C must be nonnegative, got {C}")
    if T < ENVELOPE_T_FLOOR:
        raise DomainError(f"the envelope needs T >= {ENVELOPE_T_FLOOR} (log log log T > 0), got {T}")
    with mp.workdps(30):
        T = mp.mpf(T)
        l1 = mp.log(T)
        l2 = mp.log(l1)
        l3 = mp.log(l2)
        return T * l1 * mp.exp(-mp.mpf(C) * l2 / l3)


def envelope_constant(T: float, value: float) -> float:
    """The C at which error_envelope(T, C) equals ``value``."""
    l1 = math.log(T)
    l2 = math.log(l1)
    l3 = math.log(l2)
    return math.log(T * l1 / abs(value)) * l3 / l2


def fit_envelope_constant(Ts, values) -> float:
    """Largest C with |value| <= error_envelope(T, C) at every grid point."""
    return min(envelope_constant(T, v) for T, v in zip(Ts, values))


def resonance_base(delta: float, l_max: int = 1000, tol: float = 1e-9) -> int | None:
    """Smallest l >= 2 with delta = 2 pi q / log l for a positive integer q, if any."""
    for l in range(2, l_max + 1):
        q = delta * math.log(l) / (2 * math.pi)
        if round(q) >= 1 and abs(q - round(q)) < tol:
            return l
    return None


def first_moment_limit(s0, delta: float, base: int | None = None) -> complex:
    """(1 - l^{-s0})^{-1} on a resonant progression with base l, else 1."""
    if base is None:
        base = resonance_base(delta)
    if base is None:
        return 1 + 0j
    s0 = complex(as_mpc(s0))
    return 1 / (1 - base ** (-s0))


def first_discrete_moment(s0, delta: float, N: int, threads=1) -> PrecisionComplex:
    """(1/N) sum_{0 <= n < N} zeta(s0 + i n delta)."""
    z0 = as_mpc(s0)
    if not 0 < z0.real < 1:
        raise DomainError(f"Re(s0) must lie in (0, 1), got {z0.real}")
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    if N > FIRST_MOMENT_N_CAP:
        raise ResourceError(f"N={N} exceeds budget {FIRST_MOMENT_N_CAP}")
    if N == 1:
        return zeta_reference(z0)
    s = complex(z0) + 1j * delta * np.arange(N)
    parts = ordered_map(lambda b: zeta_many(s[b[0]:b[1]]), blocks(N, _BLOCK), threads)
    vals = np.concatenate(parts)
    return PrecisionComplex.from_value(complex(math.fsum(vals.real), math.fsum(vals.imag)) / N)


def divisor_square_series(sigma: float, M: int) -> float:
    """sum_{m <= M} d(m)^2 / m^{2 sigma}."""
    table = shared_table(M)
    m = np.arange(1, M + 1, dtype=np.float64)
    return exact_sum(table.values[:M].astype(np.float64) ** 2 / m ** (2 * sigma))


@dataclass(frozen=True)
class FourthMomentResult:
    sigma: float
    d: float
    T: int
    empirical: float
    predicted: float

    @property
    def ratio(self) -> float:
        return self.empirical / self.predicted


def fourth_moment_check(sigma: float, d: float, T: int, threads=1) -> FourthMomentResult:
    """sum_{0 <= n < T} |zeta(sigma + i n d)|^4 against T sum_m d(m)^2 m^{-2 sigma}.

    The series is summed in closed form as zeta(2 sigma)^4 / zeta(4 sigma).
    Whether d avoids the excluded values 2 pi l / log(k1/k2) is the
    caller's responsibility.
    """
    if sigma <= SIGMA_FLOOR:
        raise DomainError(f"sigma must exceed {SIGMA_FLOOR} for tail control, got {sigma}")
    if d <= 0 or T < 1:
        raise DomainError("need d > 0 and T >= 1")
    if T > FOURTH_MOMENT_T_CAP:
        raise ResourceError(f"T={T} exceeds budget {FOURTH_MOMENT_T_CAP}")
    s = sigma + 1j * d * np.arange(T)
    parts = ordered_map(lambda b: zeta_many(s[b[0]:b[1]]), blocks(T, _BLOCK), threads)
    z = np.concatenate(parts)
    empirical = exact_sum(np.abs(z) ** 4)
    with mp.workdps(30):
        series = mp.zeta(2 * sigma) ** 4 / mp.zeta(4 * sigma)
    return FourthMomentResult(sigma, d, T, empirical, T * float(series))


@dataclass
class MomentReport:
    grid: list[float]
    discrete: list[float]
    continuous: list[float]
    main1: list[float]
    main2: list[float]
    envelope: list[float]
    residual_discrete: list[float]
    residual_continuous: list[float]
    dyadic_rel_error: list[float]
    mode: str = "afe"
    C_fit: float = 0.0
    start: int = 1
    meta: dict = field(default_factory=dict)

    CSV_HEADER = ("T", "discrete", "continuous", "main1", "main2", "envelope",
                  "residual_discrete", "residual_continuous")

    def rows(self):
        return list(zip(self.grid, self.discrete, self.continuous, self.main1, self.main2,
                        self.envelope, self.residual_discrete, self.residual_continuous))

    def to_json(self) -> dict:
        def clean(xs):
            return [None if isinstance(x, float) and math.isnan(x) else x for x in xs]
        return {
            "mode": self.mode,
            "C_fit": self.C_fit,
            "start": self.start,
            "rows": [dict(zip(self.CSV_HEADER, clean(list(r)))) for r in self.rows()],
            "dyadic_rel_error": clean(self.dyadic_rel_error),
            **self.meta,
        }


def dyadic_blocks(T: float) -> list[tuple[float, float]]:
    """(T/2^{j+1}, T/2^j] for j = 0, 1, ... until the blocks fall below 1."""
    out = []
    hi = T
    while hi >= 1:
        out.append((hi / 2, hi))
        hi /= 2
    return out


def dyadic_assembly_error(ns: np.ndarray, vals: np.ndarray, T: float) -> float:
    """Relative gap between the block-by-block sum and the direct sum over 1 <= n <= T."""
    keep = (ns >= 1) & (ns <= T)
    ns, vals = ns[keep], vals[keep]
    total = exact_sum(vals)
    parts = [exact_sum(vals[(ns > lo) & (ns <= hi)]) for lo, hi in dyadic_blocks(T)]
    return abs(math.fsum(parts) - total) / abs(total)


def build_report(grid, C_fit: float, mode: str = "afe", start: int = 1,
                 continuous: bool = True, threads=1) -> MomentReport:
    """Moments, main terms, envelope and dyadic re-assembly on a sorted grid of T."""
    grid = [float(T) for T in grid]
    if grid != sorted(grid):
        raise DomainError("grid must be sorted ascending")
    if not grid:
        return MomentReport([], [], [], [], [], [], [], [], [], mode, C_fit, start)
    ns, vals = discrete_terms(grid[-1], mode, start, threads)
    discrete = [exact_sum(vals[ns <= T]) for T in grid]
    if continuous and grid[-1] <= CONTINUOUS_T_CAP:
        cont = [float(x) for x in continuous_second_moments(grid, threads=threads)]
    else:
        cont = [math.nan] * len(grid)
    main1 = [main_term(T) for T in grid]
    main2 = [second_main_term(T) for T in grid]
    env = [float(error_envelope(T, C_fit)) if T >= ENVELOPE_T_FLOOR else math.nan for T in grid]
    res_d = [d - m for d, m in zip(discrete, main1)]
    res_c = [c - m for c, m in zip(cont, main1)]
    dyadic = [dyadic_assembly_error(ns, vals, T) for T in grid]
    return MomentReport(grid, discrete, cont, main1, main2, env, res_d, res_c, dyadic,
                        mode, C_fit, start)
