"""Fitted constants and tolerance knobs, stored in a versioned JSON file.

Operations never hard-code these values; callers load them from here.
:func:`regenerate` recomputes every fitted quantity from scratch, so the
stored values can be checked for stability.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import mpmath as mp
import numpy as np

from .divisor import shared_table
from .errors import DomainError
from .expsum import WiltonQuery, wilton_identity_residual
from .moments import envelope_constant
from .parallel import ordered_map
from .saddle import s1_contributions, s2_main, truncated_poisson_defect
from .zeta_eval import (
    motohashi_residual_many,
    zeta_reference,
    zeta_sq_critical_approx,
)

DEFAULT_PATH = Path(__file__).parent / "data" / "calibration.json"

ASSEMBLY_GRID = (1.0e3, 3.0e3, 1.0e4)
ASSEMBLY_EXPONENT = 0.6
WILTON_X = (1.0e3, 1.0e4, 1.0e5)
WILTON_C = (1.0, 0.7, 0.5, 0.31)
POISSON_CASES = tuple((m, T) for T in (100.0, 1000.0) for m in (1, 2, 3, 5, 10))
AFE_T_RANGE = (50.0, 5000.0)
AFE_T_EXTENDED = 1.0e4
AFE_POINTS = 50


@dataclass(frozen=True)
class Calibration:
    version: str
    values: dict
    path: Path | None = None

    def __getitem__(self, key: str):
        node = self.values
        for part in key.split("."):
            if not isinstance(node, dict) or part not in node:
                raise KeyError(key)
            node = node[part]
        return node


def load_calibration(path=None) -> Calibration:
    path = Path(path) if path is not None else DEFAULT_PATH
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if "version" not in data:
        raise DomainError(f"calibration file {path} has no version")
    return Calibration(str(data["version"]), data, path)


def round_up(x: float, sig: int = 3) -> float:
    """Smallest sig-digit decimal >= x."""
    if x <= 0:
        return 0.0
    scale = 10 ** (sig - 1 - math.floor(math.log10(x)))
    return math.ceil(x * scale) / scale


def round_down(x: float, sig: int = 3) -> float:
    """Largest sig-digit decimal <= x."""
    if x <= 0:
        return 0.0
    scale = 10 ** (sig - 1 - math.floor(math.log10(x)))
    return math.floor(x * scale) / scale


def afe_grid(extended: bool = False) -> np.ndarray:
    """The log grid for the AFE scan; the extension keeps the spacing and continues to 10^4."""
    lo, hi = AFE_T_RANGE
    ratio = (hi / lo) ** (1 / (AFE_POINTS - 1))
    stop = AFE_T_EXTENDED if extended else hi
    n = math.floor(math.log(stop / lo) / math.log(ratio) + 1e-9) + 1
    return lo * ratio ** np.arange(n)


def afe_defects(ts, threads=1) -> list[tuple[float, float, float]]:
    """(t, |zeta|^2 - AFE main sum, |zeta|^2 - AFE main sum - residual) against the oracle."""
    ts = [float(t) for t in ts]
    table = shared_table(math.ceil(max(ts) / (2 * math.pi)) + 1)

    def run(t):
        ref = float(abs(zeta_reference(mp.mpc(0.5, t), digits=20).value) ** 2)
        main = zeta_sq_critical_approx(t, table)
        res = float(motohashi_residual_many(np.array([t]), table)[0])
        return t, ref - main, ref - main - res

    return ordered_map(run, ts, threads)


def fit_afe(threads=1) -> dict:
    base = afe_defects(afe_grid(False), threads)
    ext = afe_defects(afe_grid(True)[len(base):], threads)
    t14 = max(abs(d) * t ** 0.25 for t, _, d in base)
    t14_ext = max(t14, max(abs(d) * t ** 0.25 for t, _, d in ext))
    t16 = max(abs(d) * t ** (1 / 6) for t, d, _ in base)
    return {"t14_max": t14, "t14_max_extended": t14_ext, "t16_max": t16}


def wilton_pairs() -> list[tuple[float, float]]:
    return [(x, c / math.sqrt(x)) for x in WILTON_X for c in WILTON_C]


def wilton_ratios(threads=1) -> list[float]:
    table = shared_table(int(max(WILTON_X)))

    def run(pair):
        x, eta = pair
        r = wilton_identity_residual(WiltonQuery(x, mp.mpf(eta)), table)
        return r / (math.sqrt(x) * math.log(x))

    return ordered_map(run, wilton_pairs(), threads)


def poisson_defects(theta: float, threads=1) -> list[float]:
    return ordered_map(lambda c: truncated_poisson_defect(c[0], c[1], theta).defect,
                       POISSON_CASES, threads)


def assembly_scan(threads=1, grid=ASSEMBLY_GRID) -> list[dict]:
    """S1 envelope constants, edge-case ratios and S2 defects over the T-grid."""
    out = []
    for T in grid:
        table = shared_table(math.floor(T / math.pi) + 2)
        dec = s1_contributions(T, table, threads=threads, with_direct=False)
        edge = abs(dec.case_totals["i"] + dec.case_totals["v"])
        s2 = s2_main(T, table, threads)
        out.append({
            "T": T,
            "s1_abs": abs(dec.total),
            "envelope_C": envelope_constant(T, abs(dec.total)),
            "edge_ratio": edge / T ** ASSEMBLY_EXPONENT,
            "s2_ratio": s2.difference / T ** ASSEMBLY_EXPONENT,
        })
    return out


def regenerate(threads=1, theta: float = 0.05) -> dict:
    """Recompute every fitted constant; knobs are copied unchanged."""
    scan = assembly_scan(threads)
    afe = fit_afe(threads)
    wilton = wilton_ratios(threads)
    poisson = poisson_defects(theta, threads)
    C_raw = min(r["envelope_C"] for r in scan)
    edge_raw = max(r["edge_ratio"] for r in scan)
    s2_raw = max(r["s2_ratio"] for r in scan)
    return {
        "s1": {"grid": list(ASSEMBLY_GRID), "C_fit": round_down(C_raw), "C_fit_raw": C_raw,
               "edge_const": round_up(edge_raw), "edge_const_raw": edge_raw,
               "exponent": ASSEMBLY_EXPONENT},
        "s2": {"grid": list(ASSEMBLY_GRID), "const": round_up(s2_raw), "const_raw": s2_raw,
               "exponent": ASSEMBLY_EXPONENT},
        "afe": {"t14_const": round_up(afe["t14_max"]), "t14_max_raw": afe["t14_max"],
                "t14_max_extended_raw": afe["t14_max_extended"], "t16_max_raw": afe["t16_max"]},
        "wilton": {"const": round_up(max(wilton)), "const_raw": max(wilton)},
        "poisson": {"theta": theta, "max_defect_raw": max(poisson)},
    }


KNOBS = {
    "afe.t16_knob": 5.0,
    "afe.growth_limit": 0.25,
    "saddle.knob": 5.0,
    "poisson.knob": 10.0,
    "moments.mode_rel_tol": 1.0e-3,
    "moments.first_moment_rel_tol": 0.05,
    "moments.fourth_moment_tol_sigma2": 0.05,
    "moments.fourth_moment_tol_sigma08": 0.15,
    "moments.dyadic_rel_tol": 1.0e-8,
}


def build_file(version: str, threads=1) -> dict:
    data = regenerate(threads)
    for key, value in KNOBS.items():
        section, name = key.split(".")
        data.setdefault(section, {})[name] = value
    data["version"] = version
    return data


def write_calibration(path, version: str, threads=1) -> Path:
    path = Path(path)
    data = build_file(version, threads)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
