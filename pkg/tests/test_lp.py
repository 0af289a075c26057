import itertools
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fpcert.bench import get_case
from fpcert.bernstein import scale_to_unit_box
from fpcert.krivine import assemble, normalize_constraints
from fpcert.lp import (LPFormatError, LPProblem, read_lp, residual, simplex, solve_lp, solver_budget,
                       verify_certificate, write_lp)
from fpcert.rounding import error_form


def _solve_square(B, b):
    """Gaussian elimination over Fractions; None when B is singular."""
    n = len(B)
    M = [list(row) + [bi] for row, bi in zip(B, b)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return None
        M[c], M[piv] = M[piv], M[c]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c] / M[c][c]
                M[r] = [a - f * p for a, p in zip(M[r], M[c])]
    return [M[i][n] / M[i][i] for i in range(n)]


def _independent_rows(A, b):
    """Row-reduce [A | b]; drop redundant rows, None when the system is inconsistent."""
    M = [list(r) + [bi] for r, bi in zip(A, b)]
    n = len(A[0])
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c] / M[r][c]
                M[i] = [a - f * p for a, p in zip(M[i], M[r])]
        r += 1
    if any(all(v == 0 for v in row[:n]) and row[n] != 0 for row in M):
        return None
    return [row[:n] for row in M[:r]], [row[n] for row in M[:r]]


def _brute_force(A, b, c):
    """min c.x over {Ax = b, x >= 0} by enumerating basic solutions (region is bounded)."""
    reduced = _independent_rows(A, b)
    if reduced is None:
        return None
    A, b = reduced
    m, n = len(A), len(A[0])
    best = None
    for basis in itertools.combinations(range(n), m):
        xb = _solve_square([[A[i][j] for j in basis] for i in range(m)], b)
        if xb is None or any(v < 0 for v in xb):
            continue
        val = sum(c[j] * v for j, v in zip(basis, xb))
        best = val if best is None else min(best, val)
    return best


ints = st.integers(-3, 3)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(ints, min_size=4, max_size=4), min_size=1, max_size=2),
       st.lists(ints, min_size=2, max_size=2), st.lists(ints, min_size=5, max_size=5))
def test_simplex_matches_vertex_enumeration(rows, rhs, cost):
    # x1..x4 plus a slack, with sum(x) + slack = 5 keeping the region bounded
    A = [[F(v) for v in r] + [F(0)] for r in rows] + [[F(1)] * 5]
    b = [F(v) for v in rhs[:len(rows)]] + [F(5)]
    c = [F(v) for v in cost]
    out = simplex(A, b, c)
    expected = _brute_force(A, b, c)
    if expected is None:
        assert out.status == "infeasible"
    else:
        assert out.status == "optimal"
        assert out.objective == expected
        x = [F(v) for v in out.x]
        assert all(v >= 0 for v in x)
        assert all(sum(a * v for a, v in zip(r, x)) == bi for r, bi in zip(A, b))


def test_simplex_unbounded():
    out = simplex([[F(1), F(-1)]], [F(0)], [F(-1), F(0)])
    assert out.status == "unbounded"


def _overview_assembly(k=3):
    p = get_case("overview").program()
    ef = error_form(p)
    s = [scale_to_unit_box(sj, p.box) for sj in ef.s_polynomials()]
    return assemble(s, normalize_constraints(p, p.box), k)


@pytest.mark.parametrize("direction", ["lower", "upper"])
def test_exact_path_residual_is_zero(direction):
    lp = _overview_assembly().problem(direction)
    res = solve_lp(lp, "exact")
    assert res.optimal and res.backend == "exact"
    assert residual(lp, res.t, res.lambdas) == {}
    checked = verify_certificate(lp, res.t, res.lambdas)
    assert checked.exact and checked.bound == res.t


@pytest.mark.parametrize("name, k", [("overview", 3), ("sineOrder3", 4), ("floudas4-6", 2)])
def test_float_and_exact_lp_agree(name, k):
    p = get_case(name).program()
    ef = error_form(p)
    s = [scale_to_unit_box(sj, p.box) for sj in ef.s_polynomials()]
    lp = assemble(s, normalize_constraints(p, p.box), k).problem("lower")
    a = solve_lp(lp, "exact")
    b = solve_lp(lp, "float")
    assert abs(float(a.t) - b.t) <= 1e-6 * max(1.0, abs(float(a.t)))


def test_repaired_bound_is_sound():
    lp = _overview_assembly().problem("lower")
    exact = solve_lp(lp, "exact").t
    fl = solve_lp(lp, "float")
    rng = np.random.default_rng(3)
    noisy = {j: v * (1 + 1e-7 * rng.standard_normal()) for j, v in fl.lambdas.items()}
    noisy[max(noisy) + 1 if max(noisy) + 1 < lp.ncols else 1] = -1e-9
    checked = verify_certificate(lp, fl.t, noisy)
    assert checked.repaired and checked.clamped >= 1
    assert checked.bound <= exact
    assert abs(float(checked.bound - exact)) < 1e-5


def test_lp_format_round_trip(tmp_path):
    lp = _overview_assembly().problem("upper")
    path = tmp_path / "ov.lp"
    with open(path, "w") as fh:
        write_lp(lp, fh, comment="overview")
    back = read_lp(path.read_text())
    assert (back.nrows, back.ncols, back.sense) == (lp.nrows, lp.ncols, lp.sense)
    assert back.rhs == lp.rhs
    assert solve_lp(back, "exact").t == solve_lp(lp, "exact").t


def test_lp_format_rejects_garbage():
    with pytest.raises(LPFormatError):
        read_lp("Maximize\n obj: t\nnonsense here\n")


def test_problem_validation():
    with pytest.raises(ValueError):
        LPProblem(1, 2, np.array([0]), np.array([5]), np.array([1.0]), [F(0)])


def test_solver_budget_env(monkeypatch):
    monkeypatch.setenv("FPCERT_SOLVER_BUDGET_SECS", "12.5")
    assert solver_budget() == 12.5
    monkeypatch.setenv("FPCERT_SOLVER_BUDGET_SECS", "soon")
    with pytest.raises(ValueError):
        solver_budget()
