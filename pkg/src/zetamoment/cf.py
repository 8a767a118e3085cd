"""Continued fractions of e^{pi k} and the diagnostics built on their partial quotients."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp

from .errors import DomainError, ResourceError, UncertifiedError

CF_DIGITS_CAP = 200_000
DEFAULT_CF_DIGITS = 10_000
# extra digits used to certify a prefix of quotients
CERTIFY_EXTRA = 20


def exp_pi_k(k: int, digits: int = 50) -> mp.mpf:
    """e^{pi k} with absolute error below 10^-digits."""
    if k == 0 or int(k) != k:
        raise DomainError(f"k must be a nonzero integer, got {k}")
    if digits > CF_DIGITS_CAP:
        raise ResourceError(f"{digits} digits requested, cap is {CF_DIGITS_CAP}")
    # the integer part has about pi k / ln 10 digits; carry those plus a guard
    int_digits = max(0, math.ceil(math.pi * k / math.log(10)))
    with mp.workdps(digits + int_digits + 10):
        return mp.exp(mp.pi * k)


def _quotients(value: mp.mpf, n_terms: int) -> list[int]:
    # Euclid on the exact binary rational carried by the mpf
    man, exp = value.man_exp
    if exp >= 0:
        return [int(man) << exp]
    p, q = int(man), 1 << (-exp)
    out = []
    while q and len(out) < n_terms:
        a, r = divmod(p, q)
        out.append(a)
        p, q = q, r
    return out


@dataclass(frozen=True)
class ContinuedFractionRecord:
    """Partial quotients of e^{pi k}; quotients[i] is a_i, all certified up to ``certified_upto``."""

    k: int
    digits_used: int
    quotients: tuple[int, ...]
    certified_upto: int

    def __post_init__(self):
        if any(a < 1 for a in self.quotients[1:]):
            raise DomainError("partial quotients a_i, i >= 1, must be positive")

    @property
    def convergents(self) -> tuple[list[int], list[int]]:
        return convergents(self.quotients)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "digits_used": self.digits_used,
            "quotients": [str(a) for a in self.quotients],
            "certified_upto": self.certified_upto,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ContinuedFractionRecord":
        return cls(int(data["k"]), int(data["digits_used"]),
                   tuple(int(a) for a in data["quotients"]), int(data["certified_upto"]))


def convergents(quotients) -> tuple[list[int], list[int]]:
    """Numerators and denominators p_i, q_i from the standard recurrence."""
    p, q = [], []
    p_prev, p_cur = 0, 1
    q_prev, q_cur = 1, 0
    for a in quotients:
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        p.append(p_cur)
        q.append(q_cur)
    return p, q


def continued_fraction(k: int, n_terms: int, digits: int = DEFAULT_CF_DIGITS) -> ContinuedFractionRecord:
    """The first ``n_terms`` partial quotients of e^{pi k} that survive certification.

    A prefix a_0..a_i is certified when the expansion recomputed with 20
    more digits agrees on it; the record is cut at the certified prefix.
    """
    if n_terms < 1:
        raise DomainError(f"n_terms must be positive, got {n_terms}")
    base = _quotients(exp_pi_k(k, digits), n_terms + 1)
    check = _quotients(exp_pi_k(k, digits + CERTIFY_EXTRA), n_terms + 1)
    agree = 0
    for a, b in zip(base, check):
        if a != b:
            break
        agree += 1
    # the final quotient of a finite expansion only reflects truncation
    agree = min(agree, len(base) - 1, len(check) - 1, n_terms)
    return ContinuedFractionRecord(k, digits, tuple(base[:agree]), agree - 1)


def _require_certified(record: ContinuedFractionRecord):
    if record.certified_upto < 0 or record.certified_upto != len(record.quotients) - 1:
        raise UncertifiedError("record carries uncertified quotients")


@dataclass(frozen=True)
class Lemma1Result:
    """Per-index outcome of log log a_n < c (n + log|k|) log(n + log|k|).

    ``required_c[n]`` is the smallest c that makes index n pass (0 for the
    vacuous indices with a_n <= e, inf where the right side is <= 0 but
    the left side is positive, so that no c works).
    """

    c: float
    passes: tuple[bool, ...]
    required_c: tuple[float, ...]
    minimal_c: float
    unsatisfiable: tuple[int, ...] = field(default=())

    @property
    def all_pass(self) -> bool:
        return all(self.passes)


def lemma1_weight(n: int, k: int) -> float:
    """(n + log|k|) log(n + log|k|), with the 0 * log 0 case read as 0."""
    base = n + math.log(abs(k))
    if base <= 0:
        return 0.0
    return base * math.log(base)


def lemma1_check(record: ContinuedFractionRecord, c: float) -> Lemma1Result:
    _require_certified(record)
    if c <= 0:
        raise DomainError(f"c must be positive, got {c}")
    passes, required, bad = [], [], []
    for n, a in enumerate(record.quotients):
        if a <= math.e:
            passes.append(True)
            required.append(0.0)
            continue
        lhs = math.log(math.log(a))
        w = lemma1_weight(n, record.k)
        if w <= 0:
            passes.append(False)
            required.append(math.inf)
            bad.append(n)
            continue
        passes.append(lhs < c * w)
        required.append(lhs / w)
    return Lemma1Result(c, tuple(passes), tuple(required), max(required), tuple(bad))


def pooled_minimal_c(results) -> float:
    """One constant valid for several records: the max of the per-record minima."""
    return max(r.minimal_c for r in results)


@dataclass(frozen=True)
class WaldschmidtResult:
    lhs: mp.mpf
    log_rhs: mp.mpf
    passed: bool
    below_precision_floor: bool


def waldschmidt_check(k: int, p: int, q: int, digits: int | None = None) -> WaldschmidtResult:
    """|e^{pi k} - p/q| > exp(-2^72 log(2k) log p log log p), for p >= 3.

    The right side is far below any representable precision at desk
    scale; in that case the comparison reduces to certifying lhs > 0 and
    the result carries ``below_precision_floor``.
    """
    if k < 1:
        raise DomainError(f"k must be a positive integer, got {k}")
    if p < 3:
        raise DomainError(f"need p >= 3 so that log log p > 0, got p={p}")
    if q < 1:
        raise DomainError(f"need q >= 1, got {q}")
    if digits is None:
        digits = 2 * len(str(q)) + 40
    with mp.workdps(digits + 10):
        lhs = abs(exp_pi_k(k, digits + 10) - mp.mpf(p) / q)
        log_rhs = -mp.mpf(2) ** 72 * mp.log(2 * k) * mp.log(p) * mp.log(mp.log(p))
        floor = -digits * mp.log(10)
        if log_rhs < floor:
            certified = lhs > 2 * mp.mpf(10) ** (-digits)
            return WaldschmidtResult(+lhs, +log_rhs, bool(certified), True)
        return WaldschmidtResult(+lhs, +log_rhs, bool(mp.log(lhs) > log_rhs), False)


def irrationality_exponent_estimate(record: ContinuedFractionRecord, tail_from: int = 0) -> float:
    """max over certified i >= tail_from of log(q_{i+1}) / log(q_i) + 1, skipping q_i = 1.

    Dirichlet's theorem keeps the result at least 2.  ``tail_from`` drops
    the first convergents, whose small denominators dominate the max.
    """
    _require_certified(record)
    if record.certified_upto < 3:
        raise DomainError("need at least four certified quotients")
    _, q = record.convergents
    best = 2.0
    for i in range(max(tail_from, 0), len(q) - 1):
        if q[i] > 1:
            best = max(best, math.log(q[i + 1]) / math.log(q[i]) + 1)
    return best
