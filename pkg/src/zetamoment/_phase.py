"""Double-double phase reduction.

Phases such as t*log(n)/(2*pi) reach 1e5 or more, so a plain float64
product loses about five digits before the reduction mod 1.  Here the
multiplier table is kept as an unevaluated (hi, lo) pair and the product
t*hi is formed exactly with Dekker's split, giving the reduced phase to
roughly float64 resolution regardless of the size of t.
"""
from __future__ import annotations

import threading

import mpmath as mp
import numpy as np

# decimal digits carried through the phase product
PHASE_DIGITS = 31

_SPLIT = 134217729.0  # 2**27 + 1


def split_mpf(x) -> tuple[float, float]:
    hi = float(x)
    lo = float(mp.mpf(x) - hi)
    return hi, lo


def _two_prod(a, b):
    p = a * b
    t = _SPLIT * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLIT * b
    bh = t - (t - b)
    bl = b - bh
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def reduced_phase(t, hi, lo):
    """Return (t * (hi + lo)) mod 1 in [0, 1) for float64 ``t``.

    ``t`` and the pair may broadcast against each other.  |t| must stay
    below 2**52 / max|hi| so that the Dekker product is exact.
    """
    t = np.asarray(t, dtype=np.float64)
    p, err = _two_prod(t, hi)
    r = p - np.floor(p)
    r = r + (err + t * lo)
    return r - np.floor(r)


def unit_phasor(phase):
    """exp(2*pi*i*phase) for an already reduced phase."""
    ang = 2.0 * np.pi * phase
    return np.cos(ang) + 1j * np.sin(ang)


class _LogTable:
    """Growable cache of log(n)/(2*pi) for n >= 1 as double-double pairs."""

    def __init__(self):
        self._lock = threading.Lock()
        self.hi = np.zeros(1)
        self.lo = np.zeros(1)

    def get(self, n_max: int):
        if n_max + 1 > self.hi.size:
            with self._lock:
                if n_max + 1 > self.hi.size:
                    self._extend(max(n_max + 1, 2 * self.hi.size))
        return self.hi[: n_max + 1], self.lo[: n_max + 1]

    def _extend(self, size):
        start = self.hi.size
        hi = np.empty(size)
        lo = np.empty(size)
        hi[:start] = self.hi
        lo[:start] = self.lo
        with mp.workdps(PHASE_DIGITS + 10):
            inv = 1 / (2 * mp.pi)
            for n in range(start, size):
                v = mp.log(n) * inv if n > 0 else mp.zero
                h = float(v)
                hi[n] = h
                lo[n] = float(v - h)
        self.hi, self.lo = hi, lo


LOG_TABLE = _LogTable()
