"""Command-line batch driver: one subcommand per module, CSV/JSON artifacts.

Exit codes: 0 success, 2 configuration error, 3 module error, 4 I/O error.
Errors are reported as one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import mpmath as mp
import numpy as np

from . import __version__
from .calibration import DEFAULT_PATH, Calibration, load_calibration
from .cf import CF_DIGITS_CAP, continued_fraction
from .divisor import SIEVE_CAP, shared_table
from .errors import PrecisionError, ZetaMomentError
from .expsum import RESONANT_DIGITS_CAP, conditional_bound_report, resonant_required_digits, BoundRow
from .moments import (
    AFE_T_CAP,
    CONTINUOUS_T_CAP,
    MODES,
    REFERENCE_T_CAP,
    MomentReport,
    build_report,
)
from .parallel import ordered_map, resolve_threads
from .precision import MIN_DIGITS
from .reporting import csv_body, csv_text, write_json
from .saddle import S1_T_CAP, DecompositionRow, s1_contributions, s2_main
from .zeta_eval import (
    PHASE_DIGITS,
    ZETA_DIGITS_CAP,
    afe_required_digits,
    motohashi_residual,
    zeta_reference,
    zeta_sq_critical_approx,
)

EXIT_OK, EXIT_CONFIG, EXIT_MODULE, EXIT_IO = 0, 2, 3, 4
SUBCOMMANDS = ("moment", "afe", "expsum", "saddle", "cf", "report")
AFE_SCAN_T_CAP = 2.0e4
EXPSUM_X_CAP = 1.0e7
CF_K_CAP = 1000
CF_TERMS_CAP = 100_000

DEFAULT_GRIDS = {
    "moment": [1000.0],
    "report": [2000.0, 5000.0, 10000.0],
    "afe": [50.0, 100.0, 500.0, 1000.0, 5000.0],
    "saddle": [1000.0],
}


class ConfigError(ValueError):
    pass


class RegressionMismatch(ZetaMomentError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    precision_digits: int = 30
    t_grid: tuple[float, ...] = ()
    x_grid: tuple[float, ...] = (100.0, 1000.0, 10000.0)
    k_range: tuple[int, ...] = (1, 2, 3, 4)
    theta: float = 0.05
    mode: str = "afe"
    calibration_path: str = str(DEFAULT_PATH)
    output_dir: str = "."
    threads: int | str = 1
    terms: int = 200
    K: float = 0.0
    golden: str | None = None

    def hashed_fields(self) -> dict:
        d = asdict(self)
        for key in ("threads", "output_dir"):
            d.pop(key)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.hashed_fields(), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _floats(text: str) -> tuple[float, ...]:
    out = []
    for part in str(text).replace(";", ",").split(","):
        part = part.strip()
        if part:
            out.append(float(part))
    return tuple(out)


def _ints(text: str) -> tuple[int, ...]:
    text = str(text).strip()
    if ".." in text:
        lo, hi = text.split("..")
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(p) for p in text.replace(";", ",").split(",") if p.strip())


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` lines; '#' starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key] = value
    return out


_KEY_ALIASES = {
    "precision": "precision_digits", "grid": "t_grid", "k": "k_range",
    "out": "output_dir", "calibration": "calibration_path",
}


def _coerce(key: str, value):
    if key == "precision_digits":
        return int(value)
    if key in ("t_grid", "x_grid"):
        return _floats(value)
    if key == "k_range":
        return _ints(value)
    if key in ("theta", "K"):
        return float(value)
    if key == "terms":
        return int(value)
    if key == "threads":
        return "auto" if str(value) == "auto" else int(value)
    return str(value)


def build_config(command: str, file_values: dict, overrides: dict) -> RunConfig:
    merged = {}
    for source in (file_values, overrides):
        for key, value in source.items():
            if value is None:
                continue
            key = _KEY_ALIASES.get(key, key)
            if key not in RunConfig.__dataclass_fields__ or key == "command":
                raise ConfigError(f"unknown configuration key {key!r}")
            try:
                merged[key] = _coerce(key, value)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None
    # --grid means the x-grid for expsum
    if command == "expsum" and "t_grid" in merged and "x_grid" not in overrides:
        merged["x_grid"] = merged.pop("t_grid")
    merged.setdefault("t_grid", tuple(DEFAULT_GRIDS.get(command, ())))
    config = RunConfig(command, **merged)
    validate(config)
    return config


def _cap(ok: bool, cap_name: str, detail: str):
    if not ok:
        raise ConfigError(f"{detail} violates {cap_name}")


def validate(c: RunConfig):
    if c.command not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {c.command!r}")
    if c.mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {c.mode!r}")
    _cap(0 < c.theta <= 0.1, "theta in (0, 0.1]", f"theta={c.theta}")
    _cap(MIN_DIGITS <= c.precision_digits, "MIN_DIGITS", f"precision={c.precision_digits}")
    if c.threads != "auto":
        _cap(isinstance(c.threads, int) and c.threads >= 1, "threads >= 1", f"threads={c.threads}")
    if any(not math.isfinite(t) for t in c.t_grid + c.x_grid):
        raise ConfigError("grid values must be finite")
    ts = c.t_grid
    if c.command in ("moment", "report"):
        _cap(len(ts) > 0, "non-empty grid", "grid")
        _cap(list(ts) == sorted(ts), "ascending grid", f"grid={list(ts)}")
        cap = REFERENCE_T_CAP if c.mode == "reference" else AFE_T_CAP
        name = "REFERENCE_T_CAP" if c.mode == "reference" else "AFE_T_CAP"
        for T in ts:
            _cap(1 <= T <= cap, name, f"T={T:g}")
    elif c.command == "afe":
        _cap(c.precision_digits <= ZETA_DIGITS_CAP, "ZETA_DIGITS_CAP", f"precision={c.precision_digits}")
        for t in ts:
            _cap(t >= 2 * math.pi, "t >= 2*pi", f"t={t:g}")
            _cap(t <= AFE_SCAN_T_CAP, "AFE_SCAN_T_CAP", f"t={t:g}")
            _cap(afe_required_digits(t) <= PHASE_DIGITS, "PHASE_DIGITS", f"t={t:g}")
    elif c.command == "expsum":
        _cap(len(c.k_range) > 0, "non-empty k range", "k")
        _cap(c.K >= 0, "K >= 0", f"K={c.K}")
        for x in c.x_grid:
            _cap(1 < x <= EXPSUM_X_CAP, "EXPSUM_X_CAP", f"x={x:g}")
        for k in c.k_range:
            _cap(k >= 1, "k >= 1", f"k={k}")
            if c.x_grid:
                need = resonant_required_digits(k, max(c.x_grid))
                _cap(need <= RESONANT_DIGITS_CAP, "RESONANT_DIGITS_CAP", f"k={k}")
    elif c.command == "saddle":
        for T in ts:
            _cap(10 <= T <= S1_T_CAP, "S1_T_CAP", f"T={T:g}")
    elif c.command == "cf":
        _cap(c.precision_digits <= CF_DIGITS_CAP, "CF_DIGITS_CAP", f"precision={c.precision_digits}")
        _cap(1 <= c.terms <= CF_TERMS_CAP, "CF_TERMS_CAP", f"terms={c.terms}")
        _cap(len(c.k_range) > 0, "non-empty k range", "k")
        for k in c.k_range:
            _cap(1 <= k <= CF_K_CAP, "CF_K_CAP", f"k={k}")


# ---------------------------------------------------------------- artifacts

@dataclass
class Artifact:
    name: str
    text: str


@dataclass
class Context:
    config: RunConfig
    calibration: Calibration
    artifacts: list[Artifact] = field(default_factory=list)

    @property
    def meta(self) -> dict:
        return {
            "command": self.config.command,
            "config_hash": self.config.config_hash(),
            "calibration_version": self.calibration.version,
            "package_version": __version__,
        }

    def csv(self, name, header, rows):
        self.artifacts.append(Artifact(name, csv_text(header, rows, self.meta)))

    def json(self, name, payload):
        body = {"meta": self.meta, **payload}
        self.artifacts.append(Artifact(name, json.dumps(body, indent=2, sort_keys=True, default=str) + "\n"))


def _moment_report(ctx: Context) -> MomentReport:
    c = ctx.config
    return build_report(list(c.t_grid), ctx.calibration["s1.C_fit"], mode=c.mode,
                        continuous=max(c.t_grid) <= CONTINUOUS_T_CAP, threads=c.threads)


def run_moment(ctx: Context):
    rep = _moment_report(ctx)
    ctx.csv("moment.csv", MomentReport.CSV_HEADER, rep.rows())


def run_report(ctx: Context):
    rep = _moment_report(ctx)
    header = MomentReport.CSV_HEADER + ("dyadic_rel_error",)
    rows = [r + (e,) for r, e in zip(rep.rows(), rep.dyadic_rel_error)]
    ctx.csv("report.csv", header, rows)
    ctx.json("report.json", {"report": rep.to_json()})
    if ctx.config.golden:
        golden = Path(ctx.config.golden).read_text(encoding="utf-8")
        if csv_body(golden) != csv_body(ctx.artifacts[0].text):
            raise RegressionMismatch(f"report body differs from golden file {ctx.config.golden}")


def run_afe(ctx: Context):
    c = ctx.config
    table = shared_table(math.ceil(max(c.t_grid, default=7.0) / (2 * math.pi)) + 1)

    def one(t):
        ref = float(abs(zeta_reference(mp.mpc(0.5, t), c.precision_digits).value) ** 2)
        approx = zeta_sq_critical_approx(t, table)
        res = float(motohashi_residual(t, table, c.precision_digits))
        defect = ref - approx - res
        return (t, ref, approx, res, defect, abs(defect) * t ** 0.25)

    rows = ordered_map(one, c.t_grid, c.threads)
    ctx.csv("afe.csv", ("t", "reference", "approx", "residual", "defect", "scaled_defect"), rows)


def run_expsum(ctx: Context):
    c = ctx.config
    table = shared_table(int(max(c.x_grid, default=2.0)))
    reports = ordered_map(lambda k: conditional_bound_report(k, c.x_grid, c.K, table), c.k_range, c.threads)
    rows = [r.as_tuple() for rep in reports for r in rep]
    ctx.csv("expsum.csv", BoundRow.CSV_HEADER, rows)


def run_saddle(ctx: Context):
    c = ctx.config
    rows, s2 = [], []
    for T in c.t_grid:
        table = shared_table(math.floor(T / math.pi) + 2)
        dec = s1_contributions(T, table, c.theta, c.threads, with_direct=False)
        rows += [(T,) + r.as_tuple() for r in dec.rows]
        res = s2_main(T, table, c.threads)
        s2.append({"T": T, "s1_re": dec.total.real, "s1_im": dec.total.imag,
                   "s2_re": res.computed.real, "s2_im": res.computed.imag,
                   "s2_predicted_re": res.predicted.real, "s2_predicted_im": res.predicted.imag,
                   "s2_difference": res.difference})
    ctx.csv("saddle.csv", ("T",) + DecompositionRow.CSV_HEADER, rows)
    ctx.json("saddle.json", {"totals": s2, "theta": c.theta})


def run_cf(ctx: Context):
    c = ctx.config
    recs = ordered_map(lambda k: continued_fraction(k, c.terms, c.precision_digits), c.k_range, c.threads)
    ctx.json("cf.json", {"records": [r.to_json() for r in recs]})


RUNNERS = {
    "moment": run_moment, "report": run_report, "afe": run_afe,
    "expsum": run_expsum, "saddle": run_saddle, "cf": run_cf,
}


def run_subcommand(config: RunConfig, calibration: Calibration) -> list[Path]:
    """Run one subcommand and write its artifacts; returns the written paths."""
    ctx = Context(config, calibration)
    RUNNERS[config.command](ctx)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for art in ctx.artifacts:
        p = out / art.name
        p.write_text(art.text, encoding="utf-8")
        paths.append(p)
    return paths


# ---------------------------------------------------------------- entry point

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="zetamoment", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=SUBCOMMANDS)
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--precision", type=int, help="working precision in decimal digits")
    p.add_argument("--grid", help="comma-separated T (or x for expsum) values")
    p.add_argument("--k", help="k values, '1..4' or '1,3'")
    p.add_argument("--theta", type=float, help="Poisson window margin in (0, 0.1]")
    p.add_argument("--mode", choices=MODES, help="zeta evaluation mode for moments")
    p.add_argument("--out", help="output directory")
    p.add_argument("--threads", help="worker threads or 'auto'")
    p.add_argument("--calibration", help="calibration JSON file")
    p.add_argument("--terms", type=int, help="continued-fraction terms")
    p.add_argument("--golden", help="golden report CSV to compare against (report)")
    return p


def _fail(code: int, kind: str, message: str, **extra) -> int:
    payload = {"error": kind, "message": message, "exit_code": code, **extra}
    print(json.dumps(payload, sort_keys=True, default=str), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = make_parser().parse_args(argv)
        file_values = read_config_file(args.config) if args.config else {}
        overrides = {k: getattr(args, k) for k in
                     ("precision", "grid", "k", "theta", "mode", "out", "threads",
                      "calibration", "terms", "golden")}
        config = build_config(args.command, file_values, overrides)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, "ConfigError", str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, type(exc).__name__, str(exc))
    try:
        calibration = load_calibration(config.calibration_path)
    except OSError as exc:
        return _fail(EXIT_IO, type(exc).__name__, str(exc))
    except (ValueError, ZetaMomentError) as exc:
        return _fail(EXIT_CONFIG, type(exc).__name__, f"calibration file: {exc}")
    try:
        paths = run_subcommand(config, calibration)
    except PrecisionError as exc:
        return _fail(EXIT_MODULE, "PrecisionError", str(exc),
                     required_digits=exc.required_digits, available_digits=exc.available_digits)
    except ZetaMomentError as exc:
        return _fail(EXIT_MODULE, type(exc).__name__, str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, type(exc).__name__, str(exc))
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
