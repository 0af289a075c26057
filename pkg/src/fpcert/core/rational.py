"""Quotients of polynomials."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .polynomial import Polynomial
from .scalar import Scalar


@dataclass(frozen=True)
class RationalFunction:
    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        if self.den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if self.num.nvars != self.den.nvars:
            raise ValueError("numerator and denominator must share nvars")

    @classmethod
    def from_polynomial(cls, p: Polynomial) -> "RationalFunction":
        one = Polynomial.constant(p.nvars, 1 if p.backend.value == "exact" else 1.0)
        return cls(p, one)

    @property
    def nvars(self) -> int:
        return self.num.nvars

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_polynomial(self) -> Polynomial:
        """Numerator divided by a constant denominator."""
        if not self.den.is_constant():
            raise ValueError("denominator is not constant")
        c = self.den.constant_term()
        return self.num.scale(1 / c)

    def eval(self, point: Sequence) -> Scalar:
        return self.num.eval(point) / self.den.eval(point)

    __call__ = eval

    def affine_substitute(self, var: int, a, b) -> "RationalFunction":
        return RationalFunction(self.num.affine_substitute(var, a, b), self.den.affine_substitute(var, a, b))

    def to_float(self) -> "RationalFunction":
        return RationalFunction(self.num.to_float(), self.den.to_float())

    def __repr__(self) -> str:
        if self.is_polynomial():
            return f"RationalFunction({self.as_polynomial().to_str()})"
        return f"RationalFunction(({self.num.to_str()}) / ({self.den.to_str()}))"
