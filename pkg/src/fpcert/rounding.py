"""Simple rounding model and first-order error decomposition.

Every variable read, every arithmetic operation (and optionally constants and
negations) is multiplied by ``1 + e_j`` with ``|e_j| <= eps``.  The roundoff
error ``r = fhat - f`` is split into ``l = sum_j s_j(x) e_j`` and a remainder
``h`` bounded with a second-order Lagrange enclosure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .core.expr import Expr, const, err, postorder, to_rational_function
from .core.interval import Interval
from .core.polynomial import Polynomial
from .core.rational import RationalFunction
from .core.scalar import Backend, exact, is_binary64
from .program import Program

DEFAULT_EPS = Fraction(1, 2 ** 53)

CONSTANT_POLICIES = ("none", "inexact", "all")


@dataclass(frozen=True)
class RoundingPolicy:
    """How error variables are attached.

    share_subexpressions: structurally equal subexpressions are computed once
        and share their error variable.
    round_negation: unary minus gets its own error variable (it is exact in
        IEEE arithmetic, but tools commonly count it as an operation).
    constants: "none" (constants are taken as exact), "inexact" (constants
        not representable in binary64 get an error variable) or "all".
    """

    share_subexpressions: bool = True
    round_negation: bool = True
    constants: str = "inexact"

    def __post_init__(self):
        if self.constants not in CONSTANT_POLICIES:
            raise ValueError(f"constant policy must be one of {CONSTANT_POLICIES}")


DEFAULT_POLICY = RoundingPolicy()


class UnsupportedOperator(ValueError):
    pass


@dataclass
class RoundedProgram:
    fhat: Expr
    f: Expr
    m: int
    provenance: List[str]
    nvars: int


def expand_powers(root: Expr) -> Expr:
    """Rewrite x^k as left-associated products ((x*x)*x)...; x^0 -> 1."""
    memo: Dict[int, Expr] = {}
    for node in postorder(root):
        args = tuple(memo[id(a)] for a in node.args)
        if node.op == "pow":
            k = node.value
            if k == 0:
                new = const(1)
            else:
                new = args[0]
                for _ in range(k - 1):
                    new = new * args[0]
        elif node.args:
            new = Expr(node.op, args, node.value)
        else:
            new = node
        memo[id(node)] = new
    return memo[id(root)]


def apply_rounding_model(prog: Program, eps=None, policy: RoundingPolicy = DEFAULT_POLICY) -> RoundedProgram:
    """Build fhat(x, e).  ``eps`` is not needed to build the DAG; accepted for symmetry."""
    body = expand_powers(prog.body)
    provenance: List[str] = []
    var_err: Dict[int, int] = {}
    memo: Dict[int, Expr] = {}

    def fresh(label: str) -> int:
        provenance.append(label)
        return len(provenance) - 1

    def rnd(e: Expr, j: int) -> Expr:
        return e * (const(1) + err(j))

    def visit(node: Expr) -> Expr:
        if policy.share_subexpressions and id(node) in memo:
            return memo[id(node)]
        if node.op == "var":
            i = node.value
            if i not in var_err:
                var_err[i] = fresh(f"variable {prog.var_names[i]}")
            out = rnd(node, var_err[i])
        elif node.op == "const":
            c = node.value
            wanted = policy.constants == "all" or (policy.constants == "inexact" and not is_binary64(c))
            out = rnd(node, fresh(f"constant {c}")) if wanted else node
        elif node.op == "neg":
            inner = visit(node.args[0])
            out = rnd(-inner, fresh("negation")) if policy.round_negation else -inner
        elif node.op in ("add", "sub", "mul", "div"):
            a = visit(node.args[0])
            b = visit(node.args[1])
            out = rnd(Expr(node.op, (a, b)), fresh(f"operation {node.op}"))
        else:
            raise UnsupportedOperator(f"operator {node.op!r} is not exactly rounded")
        memo[id(node)] = out
        return out

    fhat = visit(body)
    return RoundedProgram(fhat=fhat, f=body, m=len(provenance), provenance=provenance, nvars=prog.n)


@dataclass
class ErrorForm:
    """r = fhat - f = sum_j s_j e_j + h."""

    m: int
    s: List[RationalFunction]
    eps: Fraction
    var_map: List[str]
    fhat: Expr
    f: Expr
    nvars: int
    f_rational: RationalFunction = field(repr=False, default=None)
    # f as n/q with the denominator q shared by every s_j = p_j/q^2
    f_quotient: RationalFunction = field(repr=False, default=None)

    @property
    def is_polynomial(self) -> bool:
        return all(sj.is_polynomial() for sj in self.s)

    @property
    def degree(self) -> int:
        """Total degree of l' in (x, e): one more than the largest degree among the s_j."""
        d = 0
        for sj in self.s:
            if sj.num.is_zero():
                continue
            d = max(d, sj.num.degree() if sj.is_polynomial() else max(sj.num.degree(), sj.den.degree()))
        return d + 1

    def s_polynomials(self) -> List[Polynomial]:
        return [sj.as_polynomial() for sj in self.s]

    def linear_part(self, x: Sequence, e: Sequence):
        return sum((sj.eval(x) * ej for sj, ej in zip(self.s, e)), Fraction(0) if not _floaty(x, e) else 0.0)

    def r(self, x: Sequence, e: Sequence):
        from .core.expr import eval_point

        return eval_point(self.fhat, x, e) - eval_point(self.f, x, [0] * len(e))

    def remainder_at(self, x: Sequence, e: Sequence):
        return self.r(x, e) - self.linear_part(x, e)

    def remainder_expr(self) -> Expr:
        """h = fhat - f - sum_j s_j e_j as an expression DAG."""
        total = self.fhat - self.f
        for j, sj in enumerate(self.s):
            total = total - _poly_expr(sj.num) / _poly_expr(sj.den) * err(j)
        return total


def _floaty(x, e) -> bool:
    return any(isinstance(v, float) for v in list(x) + list(e))


def _poly_expr(p: Polynomial) -> Expr:
    from .core.expr import var

    total: Optional[Expr] = None
    for key, c in p.sorted_terms():
        term: Expr = const(c)
        for i, k in enumerate(key):
            for _ in range(k):
                term = term * var(i)
        total = term if total is None else total + term
    return total if total is not None else const(0)


# -- first-order coefficients ------------------------------------------------

def _dmul(p, q):
    if p is None:
        return q
    if q is None:
        return p
    return p * q


class _Den:
    """A denominator kept as a product of polynomial factors with exponents.

    Keeping the factorization lets sums use lcm(d_a, d_b) instead of
    d_a * d_b, which keeps degrees low when the same division is reused.
    """

    __slots__ = ("factors", "_poly")

    def __init__(self, factors: Dict[Polynomial, int] | None = None):
        self.factors = {f: e for f, e in (factors or {}).items() if e}
        self._poly = None

    def is_one(self) -> bool:
        return not self.factors

    def poly(self, nv: int) -> Polynomial:
        if self._poly is None:
            out = Polynomial.constant(nv, 1)
            for f, e in sorted(self.factors.items(), key=lambda fe: repr(fe[0])):
                out = out * f ** e
            self._poly = out
        return self._poly

    def times(self, other: "_Den") -> "_Den":
        out = dict(self.factors)
        for f, e in other.factors.items():
            out[f] = out.get(f, 0) + e
        return _Den(out)

    def lcm(self, other: "_Den") -> "_Den":
        out = dict(self.factors)
        for f, e in other.factors.items():
            out[f] = max(out.get(f, 0), e)
        return _Den(out)

    def over(self, other: "_Den") -> "_Den":
        """self / other, assuming other divides self factorwise."""
        return _Den({f: e - other.factors.get(f, 0) for f, e in self.factors.items()})


def _factor_atom(p: Polynomial) -> _Den:
    if p.is_constant():
        return _Den()
    return _Den({p: 1})


class _Jet:
    """Value n/d and derivatives c_j/d^2 of a node at e = 0."""

    __slots__ = ("n", "d", "c")

    def __init__(self, n: Polynomial, d: _Den, c: Dict[int, Polynomial]):
        self.n, self.d, self.c = n, d, c


def _nonzero(c: Dict[int, Polynomial]) -> Dict[int, Polynomial]:
    return {j: v for j, v in c.items() if not v.is_zero()}


def taylor_split(rp: RoundedProgram, eps=DEFAULT_EPS, f_rational: RationalFunction | None = None) -> ErrorForm:
    """Exact first-order coefficients s_j = dr/de_j (x, 0) as p_j / q^2.

    Forward-mode differentiation at e = 0 on quotients: a node holds its
    value n/d and every derivative as c_j/d^2, so all s_j share the
    denominator q^2 of the root.
    """
    nv = rp.nvars
    one = _Den()
    jets: Dict[int, _Jet] = {}
    for node in postorder(rp.fhat):
        if node.op == "var":
            jet = _Jet(Polynomial.variable(nv, node.value), one, {})
        elif node.op == "const":
            jet = _Jet(Polynomial.constant(nv, node.value), one, {})
        elif node.op == "err":
            jet = _Jet(Polynomial.zero(nv), one, {node.value: Polynomial.constant(nv, 1)})
        elif node.op == "neg":
            a = jets[id(node.args[0])]
            jet = _Jet(-a.n, a.d, {j: -c for j, c in a.c.items()})
        elif node.op in ("add", "sub"):
            a, b = jets[id(node.args[0])], jets[id(node.args[1])]
            sign = 1 if node.op == "add" else -1
            d = a.d.lcm(b.d)
            ma, mb = d.over(a.d), d.over(b.d)
            pa = None if ma.is_one() else ma.poly(nv)
            pb = None if mb.is_one() else mb.poly(nv)
            n = _dmul(a.n, pa) + _dmul(b.n, pb) * sign
            fa = None if pa is None else pa * pa
            fb = None if pb is None else pb * pb
            c: Dict[int, Polynomial] = {}
            for j, cj in a.c.items():
                c[j] = _dmul(cj, fa)
            for j, cj in b.c.items():
                term = _dmul(cj, fb) * sign
                c[j] = c[j] + term if j in c else term
            jet = _Jet(n, d, _nonzero(c))
        elif node.op == "mul":
            a, b = jets[id(node.args[0])], jets[id(node.args[1])]
            # (a/al)(b/be): derivative (c_a b be + a c_b al) / (al be)^2
            left = b.n if b.d.is_one() else b.n * b.d.poly(nv)
            right = a.n if a.d.is_one() else a.n * a.d.poly(nv)
            c = {}
            for j, cj in a.c.items():
                c[j] = cj * left
            for j, cj in b.c.items():
                term = cj * right
                c[j] = c[j] + term if j in c else term
            jet = _Jet(a.n * b.n, a.d.times(b.d), _nonzero(c))
        elif node.op == "div":
            a, b = jets[id(node.args[0])], jets[id(node.args[1])]
            if b.n.is_zero():
                raise ZeroDivisionError("denominator is identically zero")
            # (a/al)/(b/be) = a be / (al b): derivative (c_a b be - a c_b al) / (al b)^2
            if b.n.is_constant():
                k = b.n.constant_term()
                n = a.n if b.d.is_one() else a.n * b.d.poly(nv)
                d = a.d
                left = b.d.poly(nv) * (1 / k) if not b.d.is_one() else Polynomial.constant(nv, 1 / k)
                n = n * (1 / k)
                right = (a.n if a.d.is_one() else a.n * a.d.poly(nv)) * (1 / (k * k))
                c = {}
                for j, cj in a.c.items():
                    c[j] = cj * left
                for j, cj in b.c.items():
                    term = -(cj * right)
                    c[j] = c[j] + term if j in c else term
                jet = _Jet(n, d, _nonzero(c))
            else:
                left = b.n if b.d.is_one() else b.n * b.d.poly(nv)
                right = a.n if a.d.is_one() else a.n * a.d.poly(nv)
                c = {}
                for j, cj in a.c.items():
                    c[j] = cj * left
                for j, cj in b.c.items():
                    term = -(cj * right)
                    c[j] = c[j] + term if j in c else term
                n = a.n if b.d.is_one() else a.n * b.d.poly(nv)
                jet = _Jet(n, a.d.times(_factor_atom(b.n)), _nonzero(c))
        else:
            raise UnsupportedOperator(f"operator {node.op!r} in rounded program")
        jets[id(node)] = jet

    root = jets[id(rp.fhat)]
    den = root.d.poly(nv)
    f = f_rational if f_rational is not None else to_rational_function(rp.f, nv)
    # r(x, 0) must vanish: fhat(x, 0) == f(x) as rational functions
    if root.n * f.den != f.num * den:
        raise AssertionError("fhat(x, 0) differs from f(x); rounding model is inconsistent")
    q2 = den * den
    s = [RationalFunction(root.c.get(j, Polynomial.zero(nv)), q2) for j in range(rp.m)]
    return ErrorForm(m=rp.m, s=s, eps=exact(eps) if not isinstance(eps, float) else eps,
                     var_map=list(rp.provenance), fhat=rp.fhat, f=rp.f, nvars=nv, f_rational=f,
                     f_quotient=RationalFunction(root.n, den))


def error_form(prog: Program, eps=DEFAULT_EPS, policy: RoundingPolicy = DEFAULT_POLICY) -> ErrorForm:
    rp = apply_rounding_model(prog, eps, policy)
    return taylor_split(rp, eps)


# -- remainder ---------------------------------------------------------------

class _HyperDual:
    """Interval enclosure of value, e-gradient and e-Hessian (upper triangle)."""

    __slots__ = ("v", "g", "h")

    def __init__(self, v: Interval, g: Dict[int, Interval], h: Dict[Tuple[int, int], Interval]):
        self.v, self.g, self.h = v, g, h


def _acc(d: dict, key, val):
    d[key] = d[key] + val if key in d else val


def _hd_add(a: _HyperDual, b: _HyperDual, sign: int) -> _HyperDual:
    g = dict(a.g)
    h = dict(a.h)
    for j, v in b.g.items():
        _acc(g, j, v if sign > 0 else -v)
    for k, v in b.h.items():
        _acc(h, k, v if sign > 0 else -v)
    return _HyperDual(a.v + b.v if sign > 0 else a.v - b.v, g, h)


def _hd_scale(a: _HyperDual, s: Interval) -> Tuple[Dict, Dict]:
    return ({j: v * s for j, v in a.g.items()}, {k: v * s for k, v in a.h.items()})


def _hd_mul(a: _HyperDual, b: _HyperDual) -> _HyperDual:
    g, h = _hd_scale(a, b.v)
    gb, hb = _hd_scale(b, a.v)
    for j, v in gb.items():
        _acc(g, j, v)
    for k, v in hb.items():
        _acc(h, k, v)
    for i, ai in a.g.items():
        for j, bj in b.g.items():
            key = (i, j) if i <= j else (j, i)
            term = ai * bj
            if i == j:
                term = term + term
            _acc(h, key, term)
    return _HyperDual(a.v * b.v, g, h)


def _hd_square(a: _HyperDual) -> _HyperDual:
    # a*a with the value enclosed by a.v^2 (no dependency loss)
    out = _hd_mul(a, a)
    return _HyperDual(a.v.square(), out.g, out.h)


def _hd_recip(b: _HyperDual) -> _HyperDual:
    r = b.v.reciprocal()
    r2 = r * r
    r3 = r2 * r
    g = {j: -(v * r2) for j, v in b.g.items()}
    h = {k: -(v * r2) for k, v in b.h.items()}
    items = sorted(b.g.items())
    for x, (i, bi) in enumerate(items):
        for j, bj in items[x:]:
            term = bi * bj * r3
            _acc(h, (i, j), term + term)
    return _HyperDual(r, g, h)


def hessian_enclosure(fhat: Expr, box: Sequence[Interval], err_box: Sequence[Interval]) -> _HyperDual:
    as_float = any(iv.is_float for iv in list(box) + list(err_box))
    vals: Dict[int, _HyperDual] = {}
    one = Interval.point(1.0 if as_float else Fraction(1))
    for node in postorder(fhat):
        if node.op == "var":
            out = _HyperDual(box[node.value], {}, {})
        elif node.op == "const":
            c = node.value
            out = _HyperDual(Interval.widened(c, c) if as_float else Interval.point(c), {}, {})
        elif node.op == "err":
            out = _HyperDual(err_box[node.value], {node.value: one}, {})
        elif node.op == "neg":
            a = vals[id(node.args[0])]
            out = _HyperDual(-a.v, {j: -v for j, v in a.g.items()}, {k: -v for k, v in a.h.items()})
        elif node.op == "add":
            out = _hd_add(vals[id(node.args[0])], vals[id(node.args[1])], 1)
        elif node.op == "sub":
            out = _hd_add(vals[id(node.args[0])], vals[id(node.args[1])], -1)
        elif node.op == "mul":
            if node.args[0] is node.args[1]:
                out = _hd_square(vals[id(node.args[0])])
            else:
                out = _hd_mul(vals[id(node.args[0])], vals[id(node.args[1])])
        elif node.op == "div":
            out = _hd_mul(vals[id(node.args[0])], _hd_recip(vals[id(node.args[1])]))
        else:
            raise UnsupportedOperator(node.op)
        vals[id(node)] = out
    return vals[id(fhat)]


def bound_remainder(ef: ErrorForm, box: Sequence[Interval], backend: Backend = Backend.EXACT) -> Interval:
    """Enclosure of h over box x [-eps, eps]^m.

    h is the second-order Taylor remainder in e, so h = 1/2 e^T H(x, xi) e
    for some xi between 0 and e.  Enclosing every Hessian entry over the
    whole domain gives
        h in sum_i H_ii/2 [0, eps^2] + sum_{i<j} H_ij [-eps^2, eps^2].
    """
    if ef.m == 0:
        z = Fraction(0) if backend is Backend.EXACT else 0.0
        return Interval(z, z)
    if backend is Backend.EXACT:
        eps = exact(ef.eps)
        box = [Interval(exact(b.lo), exact(b.hi)) for b in box]
        ebox = [Interval(-eps, eps)] * ef.m
        sq = eps * eps
        zero = Fraction(0)
    else:
        box = [b.to_float() for b in box]
        eps = float(ef.eps)
        ebox = [Interval(-eps, eps)] * ef.m
        sq = Interval(eps, eps) * Interval(eps, eps)
        sq = sq.hi
        zero = 0.0
    hd = hessian_enclosure(ef.fhat, box, ebox)
    total = Interval(zero, zero)
    diag = Interval(zero, sq / 2)
    off = Interval(-sq, sq)
    for (i, j), hij in hd.h.items():
        total = total + hij * (diag if i == j else off)
    return total
