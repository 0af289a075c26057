"""Solve an ``LPProblem`` exactly (rational simplex) or in doubles (HiGHS)."""

from __future__ import annotations

import os
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .model import LPProblem, SolveResult
from .simplex import DEFAULT_MAX_ITER, simplex

DEFAULT_BUDGET_SECS = 600.0
BUDGET_ENV = "FPCERT_SOLVER_BUDGET_SECS"


def solver_budget(default: float = DEFAULT_BUDGET_SECS) -> float:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None or raw == "":
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"{BUDGET_ENV} must be a number of seconds, got {raw!r}")
    if value <= 0:
        raise ValueError(f"{BUDGET_ENV} must be positive")
    return value


def solve_lp(lp: LPProblem, backend: str = "exact", max_iter: int = DEFAULT_MAX_ITER,
             budget_secs: Optional[float] = None) -> SolveResult:
    if budget_secs is None:
        budget_secs = solver_budget()
    if backend == "exact":
        return _solve_exact(lp, max_iter, budget_secs)
    if backend == "float":
        return _solve_float(lp, max_iter, budget_secs)
    raise ValueError(f"unknown LP backend {backend!r}")


def _solve_exact(lp: LPProblem, max_iter: int, budget_secs: float) -> SolveResult:
    a = lp.exact_dense()
    # t is free: t = t_plus - t_minus, with t_minus appended as the last column
    rows = [r + [-r[0]] for r in a]
    n = lp.ncols + 1
    c = [Fraction(0)] * n
    sign = -1 if lp.sense == "max" else 1
    c[0], c[-1] = Fraction(sign), Fraction(-sign)
    out = simplex(rows, lp.rhs, c, max_iter=max_iter, budget_secs=budget_secs)
    if out.status != "optimal":
        return SolveResult(out.status, iterations=out.iterations, backend="exact")
    t = out.x[0] - out.x[-1]
    lambdas = {j: v for j, v in enumerate(out.x[1:-1], start=1) if v != 0}
    return SolveResult("optimal", t, lambdas, out.iterations, "exact")


_HIGHS_STATUS = {0: "optimal", 1: "iteration-limit", 2: "infeasible", 3: "unbounded"}


def _solve_float(lp: LPProblem, max_iter: int, budget_secs: float) -> SolveResult:
    a = lp.float_matrix()
    b = np.array([float(v) for v in lp.rhs])
    c = np.zeros(lp.ncols)
    c[0] = -1.0 if lp.sense == "max" else 1.0
    bounds = [(None, None)] + [(0, None)] * (lp.ncols - 1)
    # interior point plus crossover is far faster than dual simplex on these LPs
    res = linprog(c, A_eq=a, b_eq=b, bounds=bounds, method="highs-ipm",
                  options={"maxiter": max_iter, "time_limit": budget_secs, "presolve": True})
    status = _HIGHS_STATUS.get(res.status, "iteration-limit")
    iterations = int(getattr(res, "nit", 0) or 0)
    if status != "optimal":
        return SolveResult(status, iterations=iterations, backend="float", message=str(res.message))
    x = res.x
    lambdas = {int(j): float(x[j]) for j in np.flatnonzero(x[1:]) + 1}
    return SolveResult("optimal", float(x[0]), lambdas, iterations, "float")
