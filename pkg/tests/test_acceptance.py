"""One check per acceptance criterion, each reported as a PASS/FAIL line."""

import subprocess
import sys
import time
from fractions import Fraction as F
from pathlib import Path

from fpcert.bench import get_case, load_corpus
from fpcert.bernstein import abs_sums, convergence_bound, fpbern_run, scale_to_unit_box
from fpcert.core.polynomial import Polynomial
from fpcert.core.scalar import Backend
from fpcert.krivine import (assemble, assemble_dense_lp, fpkristen_run, normalize_constraints,
                            sparse_lp_dims)
from fpcert.rounding import DEFAULT_EPS, error_form

TESTS = Path(__file__).parent


def _ratio(total, ref):
    return float(total) / ref


def _run(name, method, backend=Backend.EXACT):
    prog = get_case(name).program()
    ef = error_form(prog)
    if method == "bern":
        return fpbern_run(ef, prog.box, backend=backend)
    return fpkristen_run(ef, prog, backend=backend)


def _ratio_check(rows, methods, lo, hi):
    """[(name, method, ratio)] for every run, plus the list outside [lo, hi]."""
    runs, bad = [], []
    for name in rows:
        case = get_case(name)
        for method in methods:
            res = _run(name, method)
            r = _ratio(res.total, case.reference(method))
            runs.append((name, method, r))
            if not lo <= r <= hi:
                bad.append(f"{name} {method} {r:.3f}")
    return runs, bad


def test_criterion_1_overview_exactness(criterion):
    prog = get_case("overview").program()
    ef = error_form(prog)
    start = time.perf_counter()
    bern = fpbern_run(ef, prog.box, k=(2,), backend=Backend.EXACT)
    ks = fpkristen_run(ef, prog, k=3, backend=Backend.EXACT)
    secs = time.perf_counter() - start
    ok = (bern.linear == 2 and bern.linear_interval.hi == 2 * DEFAULT_EPS
          and ks.lower == -2 and ks.upper == 2 and ks.linear_interval.hi == 2 * DEFAULT_EPS
          and ks.certificate_status == "exact" and secs < 1.0)
    detail = f"bern lbar'={bern.linear}, ks [{ks.lower}, {ks.upper}] ({ks.certificate_status}), {secs:.3f}s"
    assert criterion(1, ok, detail), detail


def test_criterion_2_example_coefficients(criterion):
    x = Polynomial.variable(1, 0)
    s = [2 * x * x - x, x * x, x * x - x]
    sums = [F(v) for v in abs_sums(s, (2,))]
    derived = error_form(get_case("overview").program()).s_polynomials()
    ok = sums == [0, 1, 2] and derived == s
    detail = f"per-index sums {[str(v) for v in sums]}, error form s matches: {derived == s}"
    assert criterion(2, ok, detail), detail


def test_criterion_3_lp_dimensions(criterion):
    prog = get_case("overview").program()
    ef = error_form(prog)
    s = [scale_to_unit_box(sj, prog.box) for sj in ef.s_polynomials()]
    nc = normalize_constraints(prog, prog.box)
    asm = assemble(s, nc, 3)
    dense = assemble_dense_lp(s, nc, 3)
    sparse_dims, dense_dims = (asm.ncols, asm.nrows), (dense.ncols, dense.nrows)
    mismatched, checked = [], 0
    for case in load_corpus():
        p = case.program()
        if p.constraints or not case.ks:
            continue
        e = error_form(p)
        k = p.degree() + 1
        a = assemble([scale_to_unit_box(sj, p.box) for sj in e.s_polynomials()], normalize_constraints(p, p.box), k)
        checked += 1
        if (a.ncols, a.nrows) != sparse_lp_dims(p.n, p.n, e.m, k):
            mismatched.append(case.name)
    ok = sparse_dims == (106, 22) and dense_dims == (166, 35) and not mismatched
    detail = (f"sparse {sparse_dims[0]}x{sparse_dims[1]}, dense {dense_dims[0]}x{dense_dims[1]}, "
              f"closed form matches {checked - len(mismatched)}/{checked} box benchmarks")
    assert criterion(3, ok, detail), detail


def test_criterion_4_box_polynomial_rows(criterion):
    rows = ["rigidBody1", "rigidBody2", "kepler0", "kepler1", "kepler2", "sineTaylor", "sqroot",
            "schwefel", "caprasse"]
    start = time.perf_counter()
    runs, bad = _ratio_check(rows, ("bern", "ks"), 0.90, 1.10)
    secs = time.perf_counter() - start
    ok = not bad and secs < 600
    detail = (f"{len(runs) - len(bad)}/{len(runs)} runs within [0.90, 1.10]"
              + (f"; outside: {', '.join(bad)}" if bad else "") + f"; {secs:.0f}s")
    assert criterion(4, ok, detail), detail


def test_criterion_5_rational_rows(criterion):
    runs, bad = _ratio_check(["doppler1", "verhulst", "turbine2"], ("bern",), 0.85, 1.20)
    detail = ", ".join(f"{n} {r:.3f}" for n, _, r in runs) + " (window [0.85, 1.20])"
    assert criterion(5, not bad, detail), detail


def test_criterion_6_semialgebraic_rows(criterion):
    runs, bad = _ratio_check(["floudas3-4", "floudas4-6"], ("ks",), 0.80, 1.25)
    detail = ", ".join(f"{n} {r:.3f}" for n, _, r in runs) + " (window [0.80, 1.25]); floudas2-6 skipped"
    assert criterion(6, not bad, detail), detail


def test_criterion_7_backend_agreement(criterion):
    worst, worst_name, count = 0.0, "", 0
    for case in load_corpus():
        if not case.bern:
            continue
        a = _run(case.name, "bern", Backend.EXACT)
        b = _run(case.name, "bern", Backend.FLOAT)
        rel = abs(float(a.total) - b.total) / float(a.total)
        count += 1
        if rel > worst:
            worst, worst_name = rel, case.name
    ok = worst <= 1e-9
    detail = f"{count} benchmarks, largest relative gap {worst:.2e}" + (f" ({worst_name})" if worst_name else "")
    assert criterion(7, ok, detail), detail


PROPERTY_TESTS = [
    "test_expansion_identity", "test_enclosure_soundness", "test_elevation_nesting", "test_linearity",
    "test_sharpness_implies_exactness", "test_monotone_in_order", "test_exact_path_residual_is_zero",
    "test_repaired_bound_is_sound", "test_repaired_float_bound_sampled_sound",
]


def test_criterion_8_property_suites(criterion):
    files = [str(TESTS / f) for f in ("test_bernstein.py", "test_krivine.py", "test_lp.py")]
    cmd = [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", "-k", " or ".join(PROPERTY_TESTS)] + files
    proc = subprocess.run(cmd, capture_output=True, text=True, cwd=TESTS.parent)
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr.strip()[-200:]
    ok = proc.returncode == 0
    detail = f"{len(PROPERTY_TESTS)} property tests: {summary}"
    assert criterion(8, ok, detail), proc.stdout[-3000:]


def test_criterion_9_convergence_diagnostic(criterion):
    x = Polynomial.variable(1, 0)
    values = {k: convergence_bound([x * x], k) for k in (2, 4, 8, 16)}
    scales = len({k * v for k, v in values.items()}) == 1
    ok = values[2] == F(3, 4) and scales
    detail = f"value at k=2 is {values[2]} (hand value 3/4); k * value constant: {scales}"
    assert criterion(9, ok, detail), detail
