"""Exact residual check and repair of LP certificates.

Every row of an assembled LP is one monomial y^g of the certificate
identity, with y ranging over a set on which |y^g| <= 1.  If the weights
returned by a solver leave a residual rho (rhs - A [t; lambda], computed in
exact rationals), the identity holds with rho added as a polynomial, so

    lower direction (max t):  t' = t - sum_g |rho_g|
    upper direction (min t):  t' = t + sum_g |rho_g|

is still a valid bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Mapping

from .model import LPProblem


@dataclass
class VerifiedBound:
    bound: Fraction
    raw: Fraction
    residual: Dict[int, Fraction] = field(default_factory=dict)
    residual_l1: Fraction = Fraction(0)
    clamped: int = 0

    @property
    def exact(self) -> bool:
        return self.residual_l1 == 0

    @property
    def repaired(self) -> bool:
        return not self.exact


def _exact(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def residual(lp: LPProblem, t, lambdas: Mapping[int, object]) -> Dict[int, Fraction]:
    """Nonzero entries of rhs - A [t; lambda] in exact arithmetic."""
    weights = {0: _exact(t)}
    for j, v in lambdas.items():
        v = _exact(v)
        if v != 0:
            weights[int(j)] = v
    res = {i: _exact(b) for i, b in enumerate(lp.rhs) if b != 0}
    for j, entries in lp.column_entries(sorted(weights)).items():
        w = weights[j]
        for r, a in entries:
            res[r] = res.get(r, Fraction(0)) - a * w
    return {r: v for r, v in res.items() if v != 0}


def verify_certificate(lp: LPProblem, t, lambdas: Mapping[int, object]) -> VerifiedBound:
    """Clamp negative weights to zero, recompute the residual exactly and repair t."""
    clamped = 0
    kept = {}
    for j, v in lambdas.items():
        v = _exact(v)
        if v < 0:
            clamped += 1
            continue
        kept[j] = v
    t = _exact(t)
    rho = residual(lp, t, kept)
    l1 = sum((abs(v) for v in rho.values()), Fraction(0))
    bound = t - l1 if lp.sense == "max" else t + l1
    return VerifiedBound(bound, t, rho, l1, clamped)
