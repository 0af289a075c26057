import random
from fractions import Fraction as F

import pytest

from fpcert.bench import get_case, load_corpus
from fpcert.core.expr import eval_point
from fpcert.core.polynomial import Polynomial
from fpcert.core.scalar import Backend
from fpcert.program import parse_program
from fpcert.rounding import (DEFAULT_EPS, RoundingPolicy, apply_rounding_model, bound_remainder,
                             error_form)

# rows whose operation count differs from the table under both constant policies
M_DEVIATIONS = {"caprasse": 33, "jet": 27}


def _sample(box, rng):
    return [iv.lo + (iv.hi - iv.lo) * F(rng.randint(0, 64), 64) for iv in box]


def test_overview_error_form():
    p = get_case("overview").program()
    ef = error_form(p)
    x = Polynomial.variable(1, 0)
    assert ef.m == 3
    assert ef.s_polynomials() == [2 * x * x - x, x * x, x * x - x]


def test_overview_remainder_is_order_eps_squared():
    p = get_case("overview").program()
    rem = bound_remainder(error_form(p), p.box)
    # second-order term only; the Hessian enclosure gives about 6 eps^2
    assert rem.mag() <= 7 * DEFAULT_EPS ** 2


def test_subexpressions_share_errors():
    p = parse_program("vars: x in [0, 1]\nlet: t = x * x\nexpr: t + t")
    assert apply_rounding_model(p).m == 3
    assert apply_rounding_model(p, policy=RoundingPolicy(share_subexpressions=False)).m == 4


def test_constant_policies():
    p = parse_program("vars: x in [0, 1]\nexpr: 0.1 * x + 0.5")
    counts = {c: error_form(p, policy=RoundingPolicy(constants=c)).m for c in ("none", "inexact", "all")}
    assert counts == {"none": 3, "inexact": 4, "all": 5}


@pytest.mark.parametrize("case", [c for c in load_corpus() if c.table_m is not None], ids=lambda c: c.name)
def test_m_matches_table(case):
    p = case.program()
    m_inexact = error_form(p).m
    m_none = error_form(p, policy=RoundingPolicy(constants="none")).m
    if case.name in M_DEVIATIONS:
        assert m_inexact == M_DEVIATIONS[case.name]
    else:
        assert case.table_m in (m_inexact, m_none)


@pytest.mark.parametrize("name", ["overview", "rigidBody1", "sqroot", "doppler1", "verhulst"])
def test_taylor_split_identity(name):
    """r(x, e) = l(x, e) + h(x, e) and h stays inside its enclosure."""
    p = get_case(name).program()
    ef = error_form(p)
    rem = bound_remainder(ef, p.box)
    rng = random.Random(1)
    for _ in range(25):
        xs = _sample(p.box, rng)
        es = [DEFAULT_EPS * F(rng.randint(-8, 8), 8) for _ in range(ef.m)]
        r = ef.r(xs, es)
        assert r == ef.linear_part(xs, es) + ef.remainder_at(xs, es)
        assert rem.contains(ef.remainder_at(xs, es))


def test_float_remainder_encloses_exact():
    p = get_case("rigidBody2").program()
    ef = error_form(p)
    ex = bound_remainder(ef, p.box)
    fl = bound_remainder(ef, p.box, Backend.FLOAT)
    assert F(fl.lo) <= ex.lo and ex.hi <= F(fl.hi)


def test_fhat_matches_rounded_evaluation():
    p = parse_program("vars: x in [0, 1]\nexpr: x * x - x")
    rp = apply_rounding_model(p)
    e = [F(1, 8), F(-1, 4), F(1, 2)]
    xv = F(1, 3)
    x1 = xv * (1 + e[0])
    expected = ((x1 * x1) * (1 + e[1]) - x1) * (1 + e[2])
    assert eval_point(rp.fhat, [xv], e) == expected
