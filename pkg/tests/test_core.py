import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from fpcert.core.expr import const, err, eval_point, interval_eval, to_rational_function, var
from fpcert.core.interval import Interval
from fpcert.core.polynomial import Polynomial, monomials_up_to
from fpcert.core.rational import RationalFunction
from fpcert.core.scalar import Backend, BackendMismatch, is_binary64, widen_down, widen_up

small = st.fractions(min_value=-4, max_value=4, max_denominator=16)


def polys(nvars=2, maxdeg=3):
    keys = st.tuples(*[st.integers(0, maxdeg)] * nvars)
    return st.dictionaries(keys, small, max_size=6).map(lambda t: Polynomial(nvars, t))


def x(i, n=2):
    return Polynomial.variable(n, i)


# -- scalars -------------------------------------------------------------------

def test_widen_brackets_the_exact_value():
    v = F(1, 10)
    assert F(widen_down(v)) <= v <= F(widen_up(v))
    assert widen_down(F(1, 2)) == widen_up(F(1, 2)) == 0.5


def test_is_binary64():
    assert is_binary64(F(3, 4))
    assert not is_binary64(F(1, 10))


# -- polynomials ---------------------------------------------------------------

def test_polynomial_arithmetic():
    p = x(0) * x(0) - x(0)
    assert p.degree() == 2
    assert p.eval([F(3), F(0)]) == 6
    assert (p + 1).constant_term() == 1
    assert p.partial_derivative(0) == 2 * x(0) - 1


def test_mixed_backends_rejected():
    with pytest.raises(BackendMismatch):
        Polynomial(1, {(0,): F(1), (1,): 1.0})


def test_affine_substitute():
    p = x(0, 1) ** 2
    q = p.affine_substitute(0, F(-1), F(3))          # x = -1 + 4y
    assert q.eval([F(1, 2)]) == 1
    assert q.eval([F(0)]) == 1 and q.eval([F(1)]) == 9


def test_monomials_up_to_count():
    assert len(list(monomials_up_to(3, 4))) == math.comb(7, 4)


@given(polys(), polys(), small, small)
def test_ring_laws_pointwise(p, q, a, b):
    pt = [a, b]
    assert (p * q).eval(pt) == p.eval(pt) * q.eval(pt)
    assert (p + q).eval(pt) == p.eval(pt) + q.eval(pt)
    assert (p - p).is_zero()


@given(polys())
def test_float_conversion_close(p):
    pt = [F(1, 3), F(-2, 5)]
    assert abs(p.to_float().eval([float(v) for v in pt]) - float(p.eval(pt))) < 1e-9


# -- intervals -----------------------------------------------------------------

def test_interval_basic():
    a = Interval(F(-1), F(2))
    assert a * a == Interval(F(-2), F(4))
    assert a ** 2 == Interval(F(0), F(4))
    assert a.mag() == 2
    with pytest.raises(ValueError):
        Interval(F(1), F(0))


def test_float_interval_encloses_exact():
    a = Interval(F(1, 10), F(3, 10))
    fa = a.to_float()
    assert F(fa.lo) <= a.lo and a.hi <= F(fa.hi)
    prod = fa * fa
    assert F(prod.lo) <= F(1, 100) and F(9, 100) <= F(prod.hi)


@given(small, small, small, small, st.sampled_from(["add", "sub", "mul"]))
def test_interval_ops_enclose_points(a, b, c, d, op):
    i1 = Interval(min(a, b), max(a, b))
    i2 = Interval(min(c, d), max(c, d))
    fn = {"add": lambda u, v: u + v, "sub": lambda u, v: u - v, "mul": lambda u, v: u * v}[op]
    out = fn(i1, i2)
    fout = fn(i1.to_float(), i2.to_float())
    rng = random.Random(0)
    for _ in range(20):
        u = i1.lo + (i1.hi - i1.lo) * F(rng.randint(0, 8), 8)
        v = i2.lo + (i2.hi - i2.lo) * F(rng.randint(0, 8), 8)
        assert out.contains(fn(u, v))
        assert F(fout.lo) <= fn(u, v) <= F(fout.hi)


# -- expressions and rational functions ---------------------------------------

def test_expr_hash_consing():
    assert var(0) * var(1) is var(0) * var(1)


def test_expr_eval_and_interval():
    e = var(0) * var(0) - var(0)
    assert eval_point(e, [F(3)]) == 6
    enc = interval_eval(e, [Interval(F(0), F(1))])
    assert enc.contains(F(-1, 4)) and enc.contains(0)


def test_error_variables_evaluate():
    e = var(0) * (const(1) + err(0))
    assert eval_point(e, [F(2)], [F(1, 2)]) == 3


def test_to_rational_function():
    e = (var(0) + const(1)) / (var(0) - const(2))
    rf = to_rational_function(e, 1)
    assert isinstance(rf, RationalFunction)
    assert rf.eval([F(5)]) == 2
    assert not rf.is_polynomial()
