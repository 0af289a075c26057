"""Sparse multivariate polynomials over exact rationals or doubles.

A polynomial is a map from multi-index (tuple of non-negative ints, one per
variable) to a nonzero coefficient.  All coefficients share one backend.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Dict, Iterable, Iterator, Mapping, Sequence, Tuple

from .scalar import Backend, BackendMismatch, Scalar, backend_of, format_scalar, normalize, widen

MultiIndex = Tuple[int, ...]


def grlex_key(alpha: MultiIndex) -> Tuple[int, MultiIndex]:
    """Sort key for graded lexicographic order."""
    return (sum(alpha), alpha)


def leq(alpha: Sequence[int], beta: Sequence[int]) -> bool:
    """Componentwise alpha <= beta."""
    if len(alpha) != len(beta):
        raise ValueError("multi-index length mismatch")
    return all(a <= b for a, b in zip(alpha, beta))


def madd(alpha: MultiIndex, beta: MultiIndex) -> MultiIndex:
    return tuple(a + b for a, b in zip(alpha, beta))


def mmax(alpha: Sequence[int], beta: Sequence[int]) -> MultiIndex:
    if len(alpha) != len(beta):
        raise ValueError("multi-index length mismatch")
    return tuple(max(a, b) for a, b in zip(alpha, beta))


class Polynomial:
    """Immutable sparse polynomial in ``nvars`` variables."""

    __slots__ = ("nvars", "terms", "_backend")

    def __init__(self, nvars: int, terms: Mapping[MultiIndex, Scalar] | None = None,
                 backend: Backend | None = None):
        if nvars < 0:
            raise ValueError("nvars must be non-negative")
        clean: Dict[MultiIndex, Scalar] = {}
        seen = backend
        for key, coef in (terms or {}).items():
            key = tuple(int(k) for k in key)
            if len(key) != nvars:
                raise ValueError(f"monomial {key} does not have {nvars} entries")
            if any(k < 0 for k in key):
                raise ValueError(f"negative exponent in {key}")
            coef = normalize(coef)
            b = backend_of(coef)
            if seen is None:
                seen = b
            elif b is not seen:
                raise BackendMismatch("mixed exact and float coefficients")
            clean[key] = clean[key] + coef if key in clean else coef
        self.nvars = nvars
        self.terms = {k: v for k, v in clean.items() if v != 0}
        self._backend = seen or Backend.EXACT

    @classmethod
    def _raw(cls, nvars: int, terms: Dict[MultiIndex, Scalar], backend: Backend) -> "Polynomial":
        # trusted constructor: keys valid, coefficients nonzero and uniform
        p = object.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        p._backend = backend
        return p

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, nvars: int, backend: Backend = Backend.EXACT) -> "Polynomial":
        return cls._raw(nvars, {}, backend)

    @classmethod
    def constant(cls, nvars: int, c) -> "Polynomial":
        c = normalize(c)
        if c == 0:
            return cls._raw(nvars, {}, backend_of(c))
        return cls._raw(nvars, {(0,) * nvars: c}, backend_of(c))

    @classmethod
    def variable(cls, nvars: int, index: int, backend: Backend = Backend.EXACT) -> "Polynomial":
        if not 0 <= index < nvars:
            raise IndexError(f"variable index {index} out of range for {nvars} variables")
        key = tuple(1 if i == index else 0 for i in range(nvars))
        return cls._raw(nvars, {key: Fraction(1) if backend is Backend.EXACT else 1.0}, backend)

    # -- basic queries ------------------------------------------------------
    @property
    def backend(self) -> Backend:
        return self._backend

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(k) for k in self.terms)

    def constant_term(self) -> Scalar:
        c = self.terms.get((0,) * self.nvars)
        if c is None:
            return Fraction(0) if self._backend is Backend.EXACT else 0.0
        return c

    def multi_degree(self) -> MultiIndex:
        deg = [0] * self.nvars
        for key in self.terms:
            for i, k in enumerate(key):
                if k > deg[i]:
                    deg[i] = k
        return tuple(deg)

    def degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def variables(self) -> set:
        used = set()
        for key in self.terms:
            used.update(i for i, k in enumerate(key) if k)
        return used

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    def __iter__(self) -> Iterator[Tuple[MultiIndex, Scalar]]:
        return iter(self.sorted_terms())

    def __len__(self) -> int:
        return len(self.terms)

    # -- arithmetic ---------------------------------------------------------
    def _check(self, other: "Polynomial") -> Backend:
        if self.nvars != other.nvars:
            raise ValueError(f"variable count mismatch: {self.nvars} vs {other.nvars}")
        if not self.terms:
            return other._backend
        if not other.terms:
            return self._backend
        if self._backend is not other._backend:
            raise BackendMismatch("cannot combine exact and float polynomials")
        return self._backend

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        return Polynomial.constant(self.nvars, other)

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        backend = self._check(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            v = out.get(key)
            if v is None:
                out[key] = c
            else:
                v = v + c
                if v == 0:
                    del out[key]
                else:
                    out[key] = v
        return Polynomial._raw(self.nvars, out, backend)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.nvars, {k: -c for k, c in self.terms.items()}, self._backend)

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def scale(self, c) -> "Polynomial":
        c = normalize(c)
        if self.terms and backend_of(c) is not self._backend:
            raise BackendMismatch("scalar backend differs from polynomial backend")
        if c == 0:
            return Polynomial._raw(self.nvars, {}, self._backend)
        return Polynomial._raw(self.nvars, {k: v * c for k, v in self.terms.items()}, self._backend)

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(other)
        backend = self._check(other)
        out: Dict[MultiIndex, Scalar] = {}
        for ka, ca in self.terms.items():
            for kb, cb in other.terms.items():
                key = tuple(x + y for x, y in zip(ka, kb))
                v = out.get(key)
                out[key] = ca * cb if v is None else v + ca * cb
        return Polynomial._raw(self.nvars, {k: v for k, v in out.items() if v != 0}, backend)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = Polynomial.constant(self.nvars, 1 if self._backend is Backend.EXACT else 1.0)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction, float)):
            return self == Polynomial.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.nvars, frozenset(self.terms.items())))

    # -- calculus and substitution ------------------------------------------
    def partial_derivative(self, var: int) -> "Polynomial":
        if not 0 <= var < self.nvars:
            raise IndexError(f"variable index {var} out of range")
        out = {}
        for key, c in self.terms.items():
            k = key[var]
            if k:
                nk = key[:var] + (k - 1,) + key[var + 1:]
                out[nk] = c * k
        return Polynomial._raw(self.nvars, out, self._backend)

    def affine_substitute(self, var: int, a, b) -> "Polynomial":
        """Return p with x_var replaced by a + (b - a) * y_var."""
        if not 0 <= var < self.nvars:
            raise IndexError(f"variable index {var} out of range")
        a, b = normalize(a), normalize(b)
        if self.terms and (backend_of(a) is not self._backend or backend_of(b) is not self._backend):
            raise BackendMismatch("substitution scalars must match the polynomial backend")
        w = b - a
        # (a + w y)^k = sum_i C(k,i) a^(k-i) w^i y^i
        out: Dict[MultiIndex, Scalar] = {}
        for key, c in self.terms.items():
            k = key[var]
            for i in range(k + 1):
                coef = c * comb(k, i) * a ** (k - i) * w ** i
                if coef == 0:
                    continue
                nk = key[:var] + (i,) + key[var + 1:]
                v = out.get(nk)
                out[nk] = coef if v is None else v + coef
        return Polynomial._raw(self.nvars, {k: v for k, v in out.items() if v != 0}, self._backend)

    def eval(self, point: Sequence) -> Scalar:
        if len(point) != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates, got {len(point)}")
        pt = [normalize(v) for v in point]
        if pt and self.terms:
            kinds = {backend_of(v) for v in pt}
            if len(kinds) > 1 or kinds.pop() is not self._backend:
                raise BackendMismatch("evaluation point backend differs from polynomial backend")
        total = Fraction(0) if self._backend is Backend.EXACT else 0.0
        for key, c in self.terms.items():
            term = c
            for x, k in zip(pt, key):
                if k:
                    term = term * x ** k
            total += term
        return total

    __call__ = eval

    def to_float(self) -> "Polynomial":
        """Explicit widening to the float backend."""
        out = {}
        for k, c in self.terms.items():
            f = widen(c)
            if f != 0.0:
                out[k] = f
        return Polynomial._raw(self.nvars, out, Backend.FLOAT)

    def embed(self, nvars: int, positions: Sequence[int]) -> "Polynomial":
        """Re-index into a ring with ``nvars`` variables; variable i goes to positions[i]."""
        if len(positions) != self.nvars:
            raise ValueError("one target position per variable required")
        out = {}
        for key, c in self.terms.items():
            nk = [0] * nvars
            for i, k in enumerate(key):
                nk[positions[i]] += k
            out[tuple(nk)] = c
        return Polynomial._raw(nvars, out, self._backend)

    def compose(self, images: Sequence["Polynomial"]) -> "Polynomial":
        """Substitute x_i := images[i] (all images share one ring)."""
        if len(images) != self.nvars:
            raise ValueError("one image per variable required")
        if not images:
            return self
        target = images[0].nvars
        one = Polynomial.constant(target, 1 if self._backend is Backend.EXACT else 1.0)
        powers: Dict[Tuple[int, int], Polynomial] = {}

        def power(i: int, k: int) -> Polynomial:
            if k == 0:
                return one
            if (i, k) not in powers:
                powers[(i, k)] = power(i, k - 1) * images[i]
            return powers[(i, k)]

        total = Polynomial.zero(target, self._backend)
        for key, c in self.terms.items():
            term = Polynomial.constant(target, c)
            for i, k in enumerate(key):
                if k:
                    term = term * power(i, k)
            total = total + term
        return total

    # -- display ------------------------------------------------------------
    def to_str(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        names = names or [f"x{i + 1}" for i in range(self.nvars)]
        parts = []
        for key, c in sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=True):
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, key) if k)
            coef = format_scalar(c)
            if not mono:
                parts.append(coef)
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{coef}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"Polynomial({self.nvars}, {self.to_str()})"


def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    return a + b


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    return a * b


def partial_derivative(p: Polynomial, var: int) -> Polynomial:
    return p.partial_derivative(var)


def affine_substitute(p: Polynomial, var: int, a, b) -> Polynomial:
    return p.affine_substitute(var, a, b)


def eval_poly(p: Polynomial, point: Sequence) -> Scalar:
    return p.eval(point)


def monomials_up_to(nvars: int, degree: int) -> Iterable[MultiIndex]:
    """All exponent tuples with total degree <= degree, in graded-lex order."""
    def rec(i: int, left: int) -> Iterable[MultiIndex]:
        if i == nvars - 1:
            for k in range(left, -1, -1):
                yield (k,)
            return
        for k in range(left, -1, -1):
            for rest in rec(i + 1, left - k):
                yield (k,) + rest

    if nvars == 0:
        return [()]
    out = list(rec(0, degree))
    out.sort(key=grlex_key)
    return out
