"""Closed intervals with exact or outward-rounded float endpoints."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .scalar import Backend, BackendMismatch, Scalar, backend_of, normalize, widen_down, widen_up


class DivisionByZeroInterval(ZeroDivisionError):
    """Raised when a divisor interval contains zero."""


def _down(x: float) -> float:
    return math.nextafter(x, -math.inf)


def _up(x: float) -> float:
    return math.nextafter(x, math.inf)


@dataclass(frozen=True, slots=True)
class Interval:
    lo: Scalar
    hi: Scalar

    def __post_init__(self):
        lo, hi = normalize(self.lo), normalize(self.hi)
        if backend_of(lo) is not backend_of(hi):
            raise BackendMismatch("interval endpoints must share a backend")
        if isinstance(lo, float) and (math.isnan(lo) or math.isnan(hi)):
            raise ValueError("NaN interval endpoint")
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x) -> "Interval":
        return cls(x, x)

    @classmethod
    def widened(cls, lo: Fraction, hi: Fraction) -> "Interval":
        """Float interval enclosing the exact interval [lo, hi]."""
        return cls(widen_down(Fraction(lo)), widen_up(Fraction(hi)))

    @property
    def backend(self) -> Backend:
        return backend_of(self.lo)

    @property
    def is_float(self) -> bool:
        return isinstance(self.lo, float)

    def to_float(self) -> "Interval":
        if self.is_float:
            return self
        return Interval.widened(self.lo, self.hi)

    def mag(self) -> Scalar:
        return max(abs(self.lo), abs(self.hi))

    def width(self) -> Scalar:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def hull(self, other: "Interval") -> "Interval":
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def _lift(self, other) -> "Interval":
        if isinstance(other, Interval):
            other_b = other.backend
        else:
            other = Interval.point(other)
            other_b = other.backend
        if other_b is not self.backend:
            raise BackendMismatch("cannot combine exact and float intervals")
        return other

    def _make(self, lo, hi) -> "Interval":
        if isinstance(lo, float):
            return Interval(_down(lo), _up(hi))
        return Interval(lo, hi)

    def __add__(self, other) -> "Interval":
        other = self._lift(other)
        return self._make(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other) -> "Interval":
        other = self._lift(other)
        return self._make(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other) -> "Interval":
        return self._lift(other) - self

    def __mul__(self, other) -> "Interval":
        other = self._lift(other)
        if self.lo == self.hi == 0 or other.lo == other.hi == 0:
            z = self.lo * 0
            return Interval(z, z)
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return self._make(min(products), max(products))

    __rmul__ = __mul__

    def reciprocal(self) -> "Interval":
        if self.lo <= 0 <= self.hi:
            raise DivisionByZeroInterval(f"divisor interval [{self.lo}, {self.hi}] contains 0")
        one = 1.0 if self.is_float else Fraction(1)
        return self._make(one / self.hi, one / self.lo)

    def __truediv__(self, other) -> "Interval":
        other = self._lift(other)
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "Interval":
        return self._lift(other) / self

    def __pow__(self, k: int) -> "Interval":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        if k == 0:
            return Interval.point(1.0 if self.is_float else Fraction(1))
        if k % 2 == 1 or self.lo >= 0:
            lo, hi = self.lo ** k, self.hi ** k
        elif self.hi <= 0:
            lo, hi = self.hi ** k, self.lo ** k
        else:
            lo, hi = self.lo * 0, max(self.lo ** k, self.hi ** k)
        if isinstance(lo, float):
            # k-1 roundings in the worst case
            lo = lo - abs(lo) * k * 2.0 ** -52 if lo != 0 else lo
            hi = hi + abs(hi) * k * 2.0 ** -52
            return self._make(lo, hi)
        return Interval(lo, hi)

    def square(self) -> "Interval":
        return self ** 2

    def __repr__(self) -> str:
        return f"[{self.lo}, {self.hi}]"
