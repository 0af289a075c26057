"""Scalar backends.

Two kinds of scalars flow through the analyzer: exact rationals
(:class:`fractions.Fraction`) and hardware doubles.  A computation picks one
backend and sticks to it.  Widening exact -> float is allowed when asked for
explicitly; float -> exact never happens implicitly.
"""

from __future__ import annotations

import math
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Union

Scalar = Union[Fraction, float]


class Backend(str, Enum):
    EXACT = "exact"
    FLOAT = "float"


class BackendMismatch(TypeError):
    """Raised when exact and float scalars meet in one computation."""


def backend_of(value) -> Backend:
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, (Fraction, int, Rational)):
        return Backend.EXACT
    if isinstance(value, float):
        return Backend.FLOAT
    raise TypeError(f"unsupported scalar type {type(value).__name__}")


def exact(value) -> Fraction:
    """Coerce an int/Fraction/decimal string to an exact rational.

    Floats are rejected: converting one would pretend a rounded value is exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        raise BackendMismatch("float -> exact conversion is not permitted")
    raise TypeError(f"cannot make an exact scalar from {type(value).__name__}")


def normalize(value) -> Scalar:
    """Return ``value`` as a canonical scalar of its own backend."""
    if isinstance(value, float):
        return value
    return exact(value)


def widen(value) -> float:
    """Explicit exact -> float widening (round to nearest)."""
    if isinstance(value, float):
        return value
    return float(exact(value))


def widen_down(value: Fraction) -> float:
    """Largest double that is <= value."""
    f = float(value)
    if Fraction(f) > value:
        f = math.nextafter(f, -math.inf)
    return f


def widen_up(value: Fraction) -> float:
    """Smallest double that is >= value."""
    f = float(value)
    if Fraction(f) < value:
        f = math.nextafter(f, math.inf)
    return f


def convert(value, backend: Backend) -> Scalar:
    if backend is Backend.EXACT:
        return exact(value)
    return widen(value)


def zero(backend: Backend) -> Scalar:
    return Fraction(0) if backend is Backend.EXACT else 0.0


def one(backend: Backend) -> Scalar:
    return Fraction(1) if backend is Backend.EXACT else 1.0


def is_binary64(value: Fraction) -> bool:
    """True when ``value`` is exactly representable as a finite IEEE double."""
    value = exact(value)
    if value == 0:
        return True
    try:
        f = float(value)
    except OverflowError:
        return False
    return math.isfinite(f) and Fraction(f) == value


def format_scalar(value: Scalar) -> str:
    if isinstance(value, float):
        return repr(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"
