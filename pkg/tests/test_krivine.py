import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from fpcert.bench import get_case
from fpcert.bernstein import scale_to_unit_box
from fpcert.core.scalar import Backend
from fpcert.krivine import (OrderTooLow, RationalBodyUnsupported, SparsityPattern, assemble,
                            assemble_dense_lp, fpkristen_run, ks_bound, normalize_constraints,
                            reconstruct, sparse_lp_dims)
from fpcert.lp import import_lp, solve_lp
from fpcert.program import parse_program
from fpcert.rounding import error_form


def _setup(prog):
    ef = error_form(prog)
    s = [scale_to_unit_box(sj, prog.box) for sj in ef.s_polynomials()]
    return ef, s, normalize_constraints(prog, prog.box)


def test_overview_sparse_and_dense_sizes_and_bounds():
    prog = get_case("overview").program()
    ef, s, nc = _setup(prog)
    asm = assemble(s, nc, 3)
    assert (asm.ncols, asm.nrows) == (106, 22) == sparse_lp_dims(1, 1, 3, 3)
    bounds = {d: ks_bound(asm.problem(d), "exact", asm)[0] for d in ("lower", "upper")}
    assert bounds == {"lower": -2, "upper": 2}
    dense = {d: assemble_dense_lp(s, nc, 3, d) for d in ("lower", "upper")}
    assert (dense["lower"].ncols, dense["lower"].nrows) == (166, 35)
    assert solve_lp(dense["lower"], "exact").t == -2
    assert solve_lp(dense["upper"], "exact").t == 2


def test_overview_run():
    prog = get_case("overview").program()
    res = fpkristen_run(error_form(prog), prog, k=3)
    assert res.linear == 2 and res.certificate_status == "exact"
    assert (res.lp_vars, res.lp_rows) == (106, 22)


def test_certificate_reproduces_lprime():
    prog = get_case("overview").program()
    ef, s, nc = _setup(prog)
    asm = assemble(s, nc, 3)
    for direction, sign in (("lower", 1), ("upper", -1)):
        _, cert = ks_bound(asm.problem(direction), "exact", asm)
        got = reconstruct(asm, cert)
        want = {(j, mono, 1): sign * c for j, sj in enumerate(s) for mono, c in sj.terms.items()}
        assert got == want


def test_sparsity_pattern():
    sp = SparsityPattern(3, 5, 4)
    assert sp.covers() and sp.running_intersection()
    assert sp.blocks[1] == ((0, 1, 2, 4), (0, 1, 2, 3, 4, 6))


def test_order_too_low():
    prog = get_case("overview").program()
    ef, s, nc = _setup(prog)
    with pytest.raises(OrderTooLow):
        assemble(s, nc, 2)


def test_rational_body_rejected():
    prog = get_case("verhulst").program()
    with pytest.raises(RationalBodyUnsupported):
        fpkristen_run(error_form(prog), prog)


def test_normalized_constraints_in_unit_range():
    prog = get_case("floudas4-6").program()
    nc = normalize_constraints(prog)
    rng = random.Random(0)
    hits = 0
    for _ in range(2000):
        y = [F(rng.randint(0, 256), 256) for _ in range(prog.n)]
        vals = [g.eval(y) for g in nc.g]
        if all(v >= 0 for v in vals[:nc.n_user]):
            hits += 1
            assert all(0 <= v <= 1 for v in vals)
    assert hits > 0


@pytest.mark.parametrize("name", ["floudas4-6", "floudas3-4"])
def test_semialgebraic_bound_is_sound(name):
    prog = get_case(name).program()
    ef = error_form(prog)
    res = fpkristen_run(ef, prog, backend=Backend.FLOAT)
    nc = normalize_constraints(prog)
    rng = random.Random(1)
    for _ in range(300):
        y = [F(rng.randint(0, 512), 512) for _ in range(prog.n)]
        if not all(g.eval(y) >= 0 for g in nc.g[:nc.n_user]):
            continue
        x = [iv.lo + (iv.hi - iv.lo) * yi for iv, yi in zip(prog.box, y)]
        es = [ef.eps * rng.choice((-1, 1)) for _ in range(ef.m)]
        assert abs(ef.r(x, es)) <= F(res.total)


def test_repaired_float_bound_sampled_sound():
    prog = get_case("rigidBody2").program()
    ef = error_form(prog)
    res = fpkristen_run(ef, prog, backend=Backend.EXACT)       # > 5000 columns: float LP + repair
    assert res.certificate_status in ("exact", "repaired")
    rng = random.Random(2)
    for _ in range(200):
        x = [iv.lo + (iv.hi - iv.lo) * F(rng.randint(0, 1024), 1024) for iv in prog.box]
        es = [ef.eps * rng.choice((-1, 1)) for _ in range(ef.m)]
        assert abs(ef.linear_part(x, es)) <= res.upper * ef.eps
        assert abs(ef.r(x, es)) <= F(res.total)


SMALL_BODIES = ["x * x - x", "x * y", "x + y", "x * x", "x - y"]


def _check_monotone(prog, top):
    ef = error_form(prog)
    assert prog.n <= 2 and ef.m <= 3
    runs = [fpkristen_run(ef, prog, k=k) for k in range(ef.degree, top + 1)]
    for a, b in zip(runs, runs[1:]):
        assert a.lower <= b.lower and b.upper <= a.upper
    # every order still encloses the values of l'
    rng = random.Random(7)
    for _ in range(50):
        x = [iv.lo + (iv.hi - iv.lo) * F(rng.randint(0, 16), 16) for iv in prog.box]
        e = [F(rng.choice((-1, 1))) for _ in range(ef.m)]
        v = ef.linear_part(x, e)
        assert runs[-1].lower <= v <= runs[-1].upper


@settings(max_examples=8, deadline=None)
@given(st.sampled_from(SMALL_BODIES), st.integers(-2, 1), st.integers(1, 3))
def test_monotone_in_order(body, lo, width):
    decls = f"x in [{lo}, {lo + width}]" + ("; y in [0, 1]" if "y" in body else "")
    prog = parse_program(f"vars: {decls}\nexpr: {body}")
    _check_monotone(prog, 5 if prog.n == 1 else 4)


def test_monotone_in_order_two_variables_to_five():
    _check_monotone(parse_program("vars: x in [-1, 1]; y in [0, 1]\nexpr: x * y"), 5)


def test_export_lp_files(tmp_path):
    prog = get_case("overview").program()
    path = tmp_path / "ov.lp"
    fpkristen_run(error_form(prog), prog, k=3, export_lp=str(path))
    lower = import_lp(str(tmp_path / "ov.lower.lp"))
    upper = import_lp(str(tmp_path / "ov.upper.lp"))
    assert (lower.ncols, lower.nrows) == (106, 22)
    assert solve_lp(lower, "exact").t == -2 and solve_lp(upper, "exact").t == 2
