"""Order-preserving parallel map and exactly rounded reductions.

Work is cut into blocks whose boundaries depend only on the problem size,
never on the thread count, and partial results are combined with
``math.fsum`` (correctly rounded), so outputs are bit-identical for any
number of threads.

mpmath keeps its working precision in one process-wide context, and
``workdps`` blocks entered on different threads restore each other's
saved values.  Mapped tasks therefore hold a shared lock while they run.
"""
from __future__ import annotations

import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

MP_LOCK = threading.RLock()


def resolve_threads(threads) -> int:
    if threads in (None, "auto", 0):
        return os.cpu_count() or 1
    threads = int(threads)
    if threads < 1:
        raise ValueError("threads must be >= 1 or 'auto'")
    return threads


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads=1) -> list[R]:
    items = list(items)
    n = resolve_threads(threads)
    if n == 1 or len(items) <= 1:
        return [func(x) for x in items]

    def guarded(x):
        with MP_LOCK:
            return func(x)

    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(guarded, items))


def blocks(n: int, size: int) -> list[tuple[int, int]]:
    """Half-open index blocks [lo, hi) covering range(n)."""
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]


def exact_sum(values) -> float:
    return math.fsum(np.asarray(values, dtype=np.float64).ravel())


def exact_csum(values) -> complex:
    v = np.asarray(values, dtype=np.complex128).ravel()
    return complex(math.fsum(v.real), math.fsum(v.imag))


def combine(parts: Sequence[complex]) -> complex:
    return complex(math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts))
