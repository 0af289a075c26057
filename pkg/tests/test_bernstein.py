import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fpcert.bench import get_case, load_corpus
from fpcert.bernstein import (DegreeTooLow, abs_sums, bernstein_coeffs, convergence_bound, degree_elevate,
                              enclosure, fpbern_run, linear_error_bound_poly, sharp_vertices)
from fpcert.core.polynomial import Polynomial
from fpcert.core.scalar import Backend
from fpcert.rounding import DEFAULT_EPS, error_form

small = st.fractions(min_value=-4, max_value=4, max_denominator=8)
unit = st.fractions(min_value=0, max_value=1, max_denominator=32)


def polys(nvars=2, maxdeg=3):
    keys = st.tuples(*[st.integers(0, maxdeg)] * nvars)
    return st.dictionaries(keys, small, min_size=1, max_size=6).map(lambda t: Polynomial(nvars, t))


def _eval_many(p: Polynomial, pts: np.ndarray) -> np.ndarray:
    out = np.zeros(len(pts))
    for key, c in p.terms.items():
        out += float(c) * np.prod(pts ** np.array(key), axis=1)
    return out


def test_example_coefficient_sums():
    x = Polynomial.variable(1, 0)
    s = [2 * x * x - x, x * x, x * x - x]
    assert list(abs_sums(s, (2,))) == [0, 1, 2]
    assert linear_error_bound_poly(s, (2,)) == 2


def test_degree_too_low():
    x = Polynomial.variable(1, 0)
    with pytest.raises(DegreeTooLow):
        bernstein_coeffs(x ** 3, (2,))


@settings(max_examples=40, deadline=None)
@given(polys(), st.tuples(st.integers(0, 2), st.integers(0, 2)), unit, unit)
def test_expansion_identity(p, extra, y1, y2):
    k = tuple(d + e for d, e in zip(p.multi_degree(), extra))
    exp = bernstein_coeffs(p, k)
    assert exp.evaluate([y1, y2]) == p.eval([y1, y2])


@settings(max_examples=10, deadline=None)
@given(polys(3, 3), st.integers(0, 2**31))
def test_enclosure_soundness(p, seed):
    bound = enclosure(bernstein_coeffs(p))
    pts = np.random.default_rng(seed).random((10_000, 3))
    vals = _eval_many(p, pts)
    tol = 1e-12 * (1 + float(max(abs(bound.lower), abs(bound.upper))))
    assert vals.min() >= float(bound.lower) - tol
    assert vals.max() <= float(bound.upper) + tol


@settings(max_examples=30, deadline=None)
@given(polys(), st.integers(1, 3))
def test_elevation_nesting(p, r):
    e1 = bernstein_coeffs(p)
    k2 = tuple(ki + r for ki in e1.k)
    e2 = degree_elevate(e1, k2)
    b1, b2 = enclosure(e1), enclosure(e2)
    assert b1.lower <= b2.lower and b2.upper <= b1.upper
    # elevating is the same as expanding directly at the higher degree
    assert (e2.coeffs == bernstein_coeffs(p, k2).coeffs).all()


@settings(max_examples=30, deadline=None)
@given(polys(), polys(), small, small)
def test_linearity(p, q, a, b):
    k = tuple(max(u, v) for u, v in zip(p.multi_degree(), q.multi_degree()))
    lhs = bernstein_coeffs(a * p + b * q, k).coeffs
    rhs = a * bernstein_coeffs(p, k).coeffs + b * bernstein_coeffs(q, k).coeffs
    assert (lhs == rhs).all()


@settings(max_examples=40, deadline=None)
@given(polys())
def test_sharpness_implies_exactness(p):
    exp = bernstein_coeffs(p)
    bound = enclosure(exp)
    for which, flag, value in (("lower", bound.sharp_lower, bound.lower), ("upper", bound.sharp_upper, bound.upper)):
        verts = sharp_vertices(exp, which)
        assert flag == bool(verts)
        for a in verts:
            y = [F(ai, ki) if ki else F(0) for ai, ki in zip(a, exp.k)]
            assert p.eval(y) == value


def test_float_coefficients_close_to_exact():
    p = get_case("kepler0").program()
    ef = error_form(p)
    s = ef.s_polynomials()
    assert math.isclose(float(linear_error_bound_poly(s)), linear_error_bound_poly(s, backend=Backend.FLOAT),
                        rel_tol=1e-12)


def test_convergence_bound_scales_inverse_k():
    x = Polynomial.variable(1, 0)
    b = [convergence_bound([x * x], k) for k in (2, 4, 8)]
    assert b[0] == 2 * b[1] == 4 * b[2]


def test_overview_run_exact():
    p = get_case("overview").program()
    res = fpbern_run(error_form(p), p.box)
    assert res.linear == 2 and res.k_used == (2,)
    assert res.sharp
    assert res.linear_interval.hi == 2 * DEFAULT_EPS


def test_run_lifts_low_degree():
    p = get_case("rigidBody2").program()
    ef = error_form(p)
    res = fpbern_run(ef, p.box, k=(1, 1, 1))
    assert res.k_used == fpbern_run(ef, p.box).k_used == (1, 2, 2)


def test_elevated_run_is_no_worse():
    p = get_case("kepler0").program()
    ef = error_form(p)
    base = fpbern_run(ef, p.box)
    up = fpbern_run(ef, p.box, k=tuple(k + 1 for k in base.k_used))
    assert up.linear <= base.linear


def _sampled_soundness(name, samples, seed=0):
    p = get_case(name).program()
    ef = error_form(p)
    res = fpbern_run(ef, p.box, backend=Backend.FLOAT)
    rng = random.Random(seed)
    worst = F(0)
    for _ in range(samples):
        xs = [iv.lo + (iv.hi - iv.lo) * F(rng.randint(0, 1024), 1024) for iv in p.box]
        es = [DEFAULT_EPS * rng.choice((-1, 1)) for _ in range(ef.m)]
        worst = max(worst, abs(ef.r(xs, es)))
    assert worst <= F(res.total)
    return worst, res.total


@pytest.mark.parametrize("name", ["jet", "turbine2", "doppler1", "verhulst"])
def test_rational_bounds_sampled_sound(name):
    worst, total = _sampled_soundness(name, 150)
    assert worst > 0


@pytest.mark.parametrize("case", [c for c in load_corpus() if c.bern and c.name in
                                  ("rigidBody1", "sineTaylor", "doppler2", "predPrey", "ex-2-2-5")],
                         ids=lambda c: c.name)
def test_float_and_exact_backends_agree(case):
    p = case.program()
    ef = error_form(p)
    a = fpbern_run(ef, p.box, backend=Backend.EXACT)
    b = fpbern_run(ef, p.box, backend=Backend.FLOAT)
    assert math.isclose(float(a.total), b.total, rel_tol=1e-9)
