"""Multi-precision complex carrier with explicit digit bookkeeping."""
from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

MIN_DIGITS = 15


@dataclass(frozen=True)
class PrecisionComplex:
    """A complex number together with the decimal digits it is good to.

    Arithmetic between two values keeps the smaller digit count.
    """

    re: mp.mpf
    im: mp.mpf
    digits: int = MIN_DIGITS

    def __post_init__(self):
        if self.digits < MIN_DIGITS:
            raise ValueError(f"digits must be >= {MIN_DIGITS}, got {self.digits}")
        object.__setattr__(self, "re", mp.mpf(self.re))
        object.__setattr__(self, "im", mp.mpf(self.im))

    @classmethod
    def from_value(cls, z, digits: int = MIN_DIGITS) -> "PrecisionComplex":
        z = mp.mpc(z)
        return cls(z.real, z.imag, digits)

    @property
    def value(self) -> mp.mpc:
        return mp.mpc(self.re, self.im)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __abs__(self) -> mp.mpf:
        return mp.hypot(self.re, self.im)

    def conjugate(self) -> "PrecisionComplex":
        return PrecisionComplex(self.re, -self.im, self.digits)

    def _combine(self, other, op):
        if isinstance(other, PrecisionComplex):
            return PrecisionComplex.from_value(
                op(self.value, other.value), min(self.digits, other.digits))
        return PrecisionComplex.from_value(op(self.value, mp.mpc(other)), self.digits)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._combine(other, lambda a, b: a / b)

    def __neg__(self):
        return PrecisionComplex(-self.re, -self.im, self.digits)

    def __str__(self):
        d = min(self.digits, 20)
        return f"({mp.nstr(self.re, d)} {'+' if self.im >= 0 else '-'} {mp.nstr(abs(self.im), d)}i)"


def as_mpc(s) -> mp.mpc:
    if isinstance(s, PrecisionComplex):
        return s.value
    return mp.mpc(s)


def digits_of(s, default: int = MIN_DIGITS) -> int:
    return s.digits if isinstance(s, PrecisionComplex) else default
