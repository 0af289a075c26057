"""Bernstein expansions on the unit box and the Bernstein roundoff bound.

For p(x) = sum_g a_g x^g on [0,1]^n and a multi-degree k >= deg p,

    b_alpha = sum_{beta <= alpha} prod_i C(alpha_i, beta_i) / C(k_i, beta_i) * a_beta

and p = sum_alpha b_alpha B_{k,alpha}.  The formula factors over the axes, so
the tensor of coefficients is computed with one small matrix per axis.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .core.interval import Interval
from .core.polynomial import MultiIndex, Polynomial, mmax
from .core.rational import RationalFunction
from .core.scalar import Backend, Scalar, exact, widen_up
from .rounding import ErrorForm, bound_remainder

DEFAULT_MAX_ELEVATIONS = 3
DEFAULT_MAX_SPLITS = 8


class NonPositiveDenominatorCoefficient(ValueError):
    """A denominator Bernstein coefficient is <= 0, so ratio bounds do not apply."""


class DegreeTooLow(ValueError):
    pass


@dataclass
class BernsteinExpansion:
    k: MultiIndex
    coeffs: np.ndarray
    source_degree: MultiIndex
    backend: Backend = Backend.EXACT

    def __post_init__(self):
        if tuple(self.coeffs.shape) != tuple(ki + 1 for ki in self.k):
            raise ValueError("coefficient tensor shape does not match k")
        if any(s > ki for s, ki in zip(self.source_degree, self.k)):
            raise DegreeTooLow("k is below the source degree")

    @property
    def size(self) -> int:
        return int(self.coeffs.size)

    def __getitem__(self, alpha):
        return self.coeffs[tuple(alpha)]

    def evaluate(self, y: Sequence) -> Scalar:
        """sum_alpha b_alpha B_{k,alpha}(y); used by tests as an identity oracle."""
        total = self.coeffs
        for i in reversed(range(len(self.k))):
            ki = self.k[i]
            basis = [math.comb(ki, a) * y[i] ** a * (1 - y[i]) ** (ki - a) for a in range(ki + 1)]
            total = np.tensordot(total, np.array(basis, dtype=total.dtype), axes=([i], [0]))
        return total.item() if isinstance(total, np.ndarray) else total


@dataclass
class BernBound:
    lower: Scalar
    upper: Scalar
    sharp_lower: bool
    sharp_upper: bool
    k_used: MultiIndex

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")


@lru_cache(maxsize=None)
def _axis_matrix_exact(k: int) -> Tuple[Tuple[Fraction, ...], ...]:
    return tuple(
        tuple(Fraction(math.comb(a, b), math.comb(k, b)) if b <= a else Fraction(0) for b in range(k + 1))
        for a in range(k + 1)
    )


def _axis_matrix(k: int, backend: Backend) -> np.ndarray:
    rows = _axis_matrix_exact(k)
    if backend is Backend.EXACT:
        return np.array(rows, dtype=object)
    return np.array([[float(v) for v in r] for r in rows], dtype=float)


def _monomial_tensor(p: Polynomial, k: MultiIndex, backend: Backend) -> np.ndarray:
    shape = tuple(ki + 1 for ki in k)
    if backend is Backend.EXACT:
        a = np.empty(shape, dtype=object)
        a.fill(Fraction(0))
        for key, c in p.terms.items():
            a[key] = exact(c)
    else:
        a = np.zeros(shape, dtype=float)
        for key, c in p.terms.items():
            a[key] = float(c)
    return a


def bernstein_coeffs(p: Polynomial, k: Sequence[int] | None = None, backend: Backend | None = None) -> BernsteinExpansion:
    """Bernstein coefficients of p on [0,1]^n at multi-degree k (default: p's multi-degree)."""
    backend = backend or p.backend
    deg = p.multi_degree()
    k = tuple(deg if k is None else (int(v) for v in k))
    if len(k) != p.nvars:
        raise ValueError("k must have one entry per variable")
    if any(ki < di for ki, di in zip(k, deg)):
        raise DegreeTooLow(f"k={k} is below the multi-degree {deg}")
    if backend is Backend.EXACT and p.backend is Backend.FLOAT and not p.is_zero():
        raise TypeError("float polynomial cannot be expanded in the exact backend")
    t = _monomial_tensor(p, k, backend)
    for i, ki in enumerate(k):
        m = _axis_matrix(ki, backend)
        # contract axis i of t with columns of m, then move the new axis back to i
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [i])), 0, i)
    return BernsteinExpansion(k=k, coeffs=t, source_degree=deg, backend=backend)


def _is_corner(alpha: Tuple[int, ...], k: MultiIndex) -> bool:
    return all(a == 0 or a == ki for a, ki in zip(alpha, k))


def enclosure(exp: BernsteinExpansion) -> BernBound:
    c = exp.coeffs
    flat = c.ravel()
    lo = min(flat)
    hi = max(flat)
    corners = [alpha for alpha in product(*[(0, ki) if ki else (0,) for ki in exp.k])]
    sharp_lo = any(c[a] == lo for a in corners)
    sharp_hi = any(c[a] == hi for a in corners)
    return BernBound(lower=lo, upper=hi, sharp_lower=sharp_lo, sharp_upper=sharp_hi, k_used=exp.k)


def sharp_vertices(exp: BernsteinExpansion, which: str) -> List[Tuple[int, ...]]:
    """Corner indices attaining the lower ("lower") or upper ("upper") bound."""
    bound = enclosure(exp)
    target = bound.lower if which == "lower" else bound.upper
    return [a for a in product(*[(0, ki) if ki else (0,) for ki in exp.k]) if exp.coeffs[a] == target]


def degree_elevate(exp: BernsteinExpansion, k2: Sequence[int]) -> BernsteinExpansion:
    """Re-express at multi-degree k2 >= k with the elevation identity

        b'_g = sum_a C(k, a) C(k2 - k, g - a) / C(k2, g) * b_a   (per axis).
    """
    k2 = tuple(int(v) for v in k2)
    if any(b < a for a, b in zip(exp.k, k2)):
        raise DegreeTooLow("cannot elevate to a lower degree")
    t = exp.coeffs
    for i, (ki, ti) in enumerate(zip(exp.k, k2)):
        if ti == ki:
            continue
        r = ti - ki
        rows = []
        for g in range(ti + 1):
            row = []
            for a in range(ki + 1):
                if 0 <= g - a <= r:
                    v = Fraction(math.comb(ki, a) * math.comb(r, g - a), math.comb(ti, g))
                else:
                    v = Fraction(0)
                row.append(v if exp.backend is Backend.EXACT else float(v))
            rows.append(row)
        m = np.array(rows, dtype=object if exp.backend is Backend.EXACT else float)
        t = np.moveaxis(np.tensordot(m, t, axes=([1], [i])), 0, i)
    return BernsteinExpansion(k=k2, coeffs=t, source_degree=exp.source_degree, backend=exp.backend)


def rational_enclosure(num: BernsteinExpansion, den: BernsteinExpansion) -> BernBound:
    if num.k != den.k:
        raise ValueError("numerator and denominator must share k")
    if min(den.coeffs.ravel()) <= 0:
        raise NonPositiveDenominatorCoefficient("denominator has a Bernstein coefficient <= 0")
    ratios = num.coeffs / den.coeffs
    return enclosure(BernsteinExpansion(k=num.k, coeffs=ratios, source_degree=tuple(0 for _ in num.k),
                                        backend=num.backend))


def _check_k(k: MultiIndex, polys: Sequence[Polynomial]):
    for p in polys:
        if any(ki < di for ki, di in zip(k, p.multi_degree())):
            raise DegreeTooLow(f"k={k} is below the multi-degree {p.multi_degree()}")


def _abs_sum(exps: Sequence[BernsteinExpansion], backend: Backend) -> np.ndarray:
    total = None
    for e in exps:
        a = np.abs(e.coeffs)
        total = a if total is None else total + a
    return total


def linear_error_bound_poly(s: Sequence[Polynomial], k: Sequence[int] | None = None,
                            backend: Backend = Backend.EXACT) -> Scalar:
    """max_alpha sum_j |b_alpha(s_j)|; bounds |sum_j s_j e_j| over [0,1]^n x [-1,1]^m."""
    if not s:
        return Fraction(0) if backend is Backend.EXACT else 0.0
    if k is None:
        k = s[0].multi_degree()
        for p in s[1:]:
            k = mmax(k, p.multi_degree())
    k = tuple(k)
    _check_k(k, s)
    if backend is Backend.FLOAT:
        s = [p.to_float() for p in s]
    sums = _abs_sum([bernstein_coeffs(p, k, backend) for p in s], backend)
    return max(sums.ravel())


def abs_sums(s: Sequence[Polynomial], k: Sequence[int], backend: Backend = Backend.EXACT) -> np.ndarray:
    """Per-index sums sum_j |b_alpha(s_j)| as a tensor."""
    return _abs_sum([bernstein_coeffs(p, k, backend) for p in s], backend)


@dataclass
class RationalBoundResult:
    value: Scalar
    k_used: MultiIndex
    elevations: int


def linear_error_bound_rational(s: Sequence[RationalFunction], k: Sequence[int] | None = None,
                                backend: Backend = Backend.EXACT,
                                max_elevations: int = DEFAULT_MAX_ELEVATIONS) -> Scalar:
    return linear_error_bound_rational_detail(s, k, backend, max_elevations).value


def linear_error_bound_rational_detail(s: Sequence[RationalFunction], k: Sequence[int] | None = None,
                                       backend: Backend = Backend.EXACT,
                                       max_elevations: int = DEFAULT_MAX_ELEVATIONS) -> RationalBoundResult:
    """Bound |sum_j p_j/q_j e_j| using ratios of Bernstein coefficients.

    With one shared denominator q, l' = (sum_j p_j e_j)/q and the ratio
    enclosure gives max_alpha sum_j |b_alpha(p_j)| / b_alpha(q).  When the
    denominators differ the per-term bounds are summed instead.
    Returns +inf when some denominator coefficient stays <= 0 after
    ``max_elevations`` uniform elevations.
    """
    zero = Fraction(0) if backend is Backend.EXACT else 0.0
    if not s:
        return RationalBoundResult(zero, (), 0)
    nv = s[0].nvars
    need = tuple(0 for _ in range(nv))
    for r in s:
        need = mmax(need, mmax(r.num.multi_degree(), r.den.multi_degree()))
    if k is None:
        k = need
    k = tuple(k)
    if any(ki < di for ki, di in zip(k, need)):
        raise DegreeTooLow(f"k={k} is below the required multi-degree {need}")
    if backend is Backend.FLOAT:
        s = [r.to_float() for r in s]
    shared = all(r.den == s[0].den for r in s)
    for step in range(max_elevations + 1):
        kk = tuple(ki + step for ki in k)
        dens = {}
        ok = True
        for r in s:
            key = id(r.den) if not shared else 0
            if key not in dens:
                dens[key] = bernstein_coeffs(r.den, kk, backend)
                if min(dens[key].coeffs.ravel()) <= 0:
                    ok = False
                    break
        if not ok:
            continue
        if shared:
            den = dens[0].coeffs
            nums = _abs_sum([bernstein_coeffs(r.num, kk, backend) for r in s], backend)
            return RationalBoundResult(max((nums / den).ravel()), kk, step)
        total = zero
        for r in s:
            num = np.abs(bernstein_coeffs(r.num, kk, backend).coeffs)
            total += max((num / dens[id(r.den)].coeffs).ravel())
        return RationalBoundResult(total, kk, step)
    return RationalBoundResult(math.inf, tuple(ki + max_elevations for ki in k), max_elevations)


def convergence_bound(s: Sequence[Polynomial], k: int) -> Fraction:
    """(3 L_m / k) C(d+1, 3) n^d with L_m = sum_j L(s_j), L(s) = max |s_a| a!/|a|!."""
    if not s:
        return Fraction(0)
    n = s[0].nvars
    d = max(p.degree() for p in s)
    if k < d:
        raise DegreeTooLow("k must be at least the degree")

    def lip(p: Polynomial) -> Fraction:
        best = Fraction(0)
        for alpha, c in p.terms.items():
            w = Fraction(math.prod(math.factorial(a) for a in alpha), math.factorial(sum(alpha)))
            best = max(best, abs(exact(c)) * w)
        return best

    lm = sum((lip(p) for p in s), Fraction(0))
    return 3 * lm / k * math.comb(d + 1, 3) * n ** d


# -- pipeline ---------------------------------------------------------------

def scale_to_unit_box(p: Polynomial, box: Sequence[Interval]) -> Polynomial:
    """p(a + (b - a) y): the polynomial in unit-box coordinates y."""
    for i, iv in enumerate(box):
        p = p.affine_substitute(i, iv.lo, iv.hi)
    return p


def scale_rational(r: RationalFunction, box: Sequence[Interval]) -> RationalFunction:
    return RationalFunction(scale_to_unit_box(r.num, box), scale_to_unit_box(r.den, box))


def _float_box(box: Sequence[Interval]) -> List[Interval]:
    # the float backend reads the bounds as doubles
    return [Interval(float(iv.lo), float(iv.hi)) for iv in box]


def default_degree(ef: ErrorForm) -> MultiIndex:
    f = ef.f_quotient if ef.f_quotient is not None else ef.f_rational
    nv = ef.nvars
    if f is None or f.is_polynomial():
        k = f.num.multi_degree() if f is not None else tuple(0 for _ in range(nv))
        for sj in ef.s:
            k = mmax(k, sj.num.multi_degree())
        return k
    d = mmax(f.num.multi_degree(), f.den.multi_degree())
    k = tuple(2 * di for di in d)
    for sj in ef.s:
        k = mmax(k, mmax(sj.num.multi_degree(), sj.den.multi_degree()))
    return k


def _rational_over_boxes(rats: Sequence[RationalFunction], box: Sequence[Interval], k: MultiIndex,
                         backend: Backend, max_elevations: int, max_splits: int):
    """max of the ratio bound over sub-boxes.

    When a denominator has a Bernstein coefficient <= 0 even after elevation,
    the box is bisected along its widest side (measured relative to the
    input box) and both halves are bounded; at most ``max_splits`` levels.
    """
    widths = [iv.hi - iv.lo for iv in box]
    best = None
    k_used, elevations = tuple(k), 0
    work = [(list(box), 0)]
    while work:
        sub, depth = work.pop()
        scaled = [scale_rational(r, sub) for r in rats]
        res = linear_error_bound_rational_detail(scaled, k, backend, max_elevations)
        if res.value == math.inf and depth < max_splits:
            i = max(range(len(sub)), key=lambda t: (sub[t].hi - sub[t].lo) / widths[t])
            lo, hi = sub[i].lo, sub[i].hi
            mid = (lo + hi) / 2
            left, right = list(sub), list(sub)
            left[i] = Interval(lo, mid)
            right[i] = Interval(mid, hi)
            work.append((left, depth + 1))
            work.append((right, depth + 1))
            continue
        elevations = max(elevations, res.elevations)
        k_used = mmax(k_used, res.k_used)
        best = res.value if best is None else max(best, res.value)
    return best, k_used, elevations


@dataclass
class BernResult:
    linear: Scalar          # l'-bar, the bound on |l'| (unscaled by eps)
    linear_interval: Interval
    remainder: Interval
    total: Scalar
    k_used: MultiIndex
    sharp: bool
    elevations: int = 0
    seconds: float = 0.0
    backend: Backend = Backend.EXACT


def fpbern_run(ef: ErrorForm, box: Sequence[Interval], k: Sequence[int] | None = None,
               backend: Backend = Backend.EXACT, max_elevations: int = DEFAULT_MAX_ELEVATIONS,
               max_splits: int = DEFAULT_MAX_SPLITS) -> BernResult:
    """Bound |fhat - f| over the box: eps * lbar' + remainder.

    For polynomial programs a requested ``k`` below the multi-degree of some
    s_j is raised to it; ``k_used`` reports the degree actually used.
    """
    start = time.perf_counter()
    backend = Backend(backend)
    zero = Fraction(0) if backend is Backend.EXACT else 0.0
    if ef.m == 0:
        z = Interval(zero, zero)
        return BernResult(zero, z, z, zero, tuple(0 for _ in box), True, 0, 0.0, backend)
    if k is None:
        k = default_degree(ef)
    k = tuple(k)
    if backend is Backend.EXACT:
        sbox = list(box)
    else:
        sbox = _float_box(box)
    sharp = False
    elevations = 0
    if ef.is_polynomial:
        polys = [sj.as_polynomial() for sj in ef.s]
        if backend is Backend.FLOAT:
            polys = [p.to_float() for p in polys]
        scaled = [scale_to_unit_box(p, sbox) for p in polys]
        kk = k
        for p in scaled:
            kk = mmax(kk, p.multi_degree())
        sums = abs_sums(scaled, kk, backend)
        lbar = max(sums.ravel())
        corners = product(*[(0, ki) if ki else (0,) for ki in kk])
        sharp = any(sums[c] == lbar for c in corners)
        k_used = kk
    else:
        rats = ef.s if backend is Backend.EXACT else [r.to_float() for r in ef.s]
        lbar, k_used, elevations = _rational_over_boxes(rats, sbox, k, backend, max_elevations, max_splits)
    eps = ef.eps if backend is Backend.EXACT else float(ef.eps)
    rem = bound_remainder(ef, box, backend)
    if lbar == math.inf:
        lin = Interval(-math.inf, math.inf) if backend is Backend.FLOAT else None
        return BernResult(math.inf, lin, rem, math.inf, k_used, False, elevations,
                          time.perf_counter() - start, backend)
    if backend is Backend.EXACT:
        lin = Interval(-eps * lbar, eps * lbar)
        total = (lin + rem).mag()
    else:
        hi = widen_up(Fraction(eps) * Fraction(lbar))
        lin = Interval(-hi, hi)
        total = (lin + rem).mag()
    return BernResult(lbar, lin, rem, total, k_used, sharp, elevations, time.perf_counter() - start, backend)
