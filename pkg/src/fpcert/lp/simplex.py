"""Two-phase primal simplex in exact rational arithmetic with Bland's rule.

Standard form: minimize c.x subject to A x = b, x >= 0.  The tableau is a
numpy object array of python-flint ``fmpq`` values, so a pivot is one
vectorized row update done in C-level rationals.  No scaling, no presolve.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np
from flint import fmpq

DEFAULT_MAX_ITER = 10 ** 6


def to_fmpq(v) -> fmpq:
    if isinstance(v, fmpq):
        return v
    v = Fraction(v)
    return fmpq(v.numerator, v.denominator)


def to_fraction(q) -> Fraction:
    return Fraction(int(q.p), int(q.q))


@dataclass
class SimplexOutcome:
    status: str                 # optimal | infeasible | unbounded | iteration-limit
    x: Optional[List[Fraction]]
    objective: Optional[Fraction]
    iterations: int
    basis: Optional[List[int]] = None


class _Limit(Exception):
    pass


class SimplexTableau:
    """Rows [A | b] with the reduced-cost row last; ``basis[i]`` is row i's basic column."""

    def __init__(self, T: np.ndarray, basis: List[int]):
        self.T = T
        self.basis = basis

    @property
    def nrows(self) -> int:
        return self.T.shape[0] - 1

    def pivot(self, r: int, c: int):
        T = self.T
        T[r] = T[r] / T[r, c]
        pr = T[r]
        nz = np.flatnonzero(pr != 0)
        col = T[:, c]
        rows = [i for i in np.flatnonzero(col != 0).tolist() if i != r]
        if rows:
            f = col[rows].copy()
            T[np.ix_(rows, nz)] = T[np.ix_(rows, nz)] - np.outer(f, pr[nz])
        self.basis[r] = c

    def run(self, ncols: int, counter: List[int], max_iter: int, deadline: Optional[float]) -> str:
        """Bland iterations over columns < ncols until optimal or unbounded."""
        T = self.T
        m = self.nrows
        while True:
            rc = T[-1, :ncols]
            neg = np.flatnonzero(rc < 0)
            if len(neg) == 0:
                return "optimal"
            if counter[0] >= max_iter or (deadline is not None and time.monotonic() > deadline):
                raise _Limit()
            e = int(neg[0])
            col = T[:m, e]
            cand = np.flatnonzero(col > 0)
            if len(cand) == 0:
                return "unbounded"
            best = None
            for i in cand.tolist():
                ratio = T[i, -1] / col[i]
                if best is None or ratio < best[0] or (ratio == best[0] and self.basis[i] < self.basis[best[1]]):
                    best = (ratio, i)
            self.pivot(best[1], e)
            counter[0] += 1


def simplex(A: Sequence[Sequence], b: Sequence, c: Sequence, max_iter: int = DEFAULT_MAX_ITER,
            budget_secs: Optional[float] = None) -> SimplexOutcome:
    """Minimize c.x s.t. A x = b, x >= 0, exactly."""
    m = len(A)
    n = len(c)
    deadline = time.monotonic() + budget_secs if budget_secs else None
    zero, one = fmpq(0), fmpq(1)
    T = np.empty((m + 1, n + m + 1), dtype=object)
    T.fill(zero)
    for i in range(m):
        row = [to_fmpq(v) for v in A[i]]
        bi = to_fmpq(b[i])
        sign = -1 if bi < 0 else 1
        T[i, :n] = [v * sign for v in row]
        T[i, n + i] = one
        T[i, -1] = bi * sign
    # phase 1 cost: sum of artificials, written in reduced form
    T[-1, :n + m] = zero
    for i in range(m):
        T[-1, :n] = T[-1, :n] - T[i, :n]
        T[-1, -1] = T[-1, -1] - T[i, -1]
    tab = SimplexTableau(T, list(range(n, n + m)))
    counter = [0]
    try:
        status = tab.run(n + m, counter, max_iter, deadline)
        if status != "optimal" or tab.T[-1, -1] != 0:
            return SimplexOutcome("infeasible", None, None, counter[0])
        # drive artificials out of the basis; drop redundant rows
        keep = []
        for i in range(m):
            if tab.basis[i] >= n:
                nz = np.flatnonzero(tab.T[i, :n] != 0)
                if len(nz) == 0:
                    continue
                tab.pivot(i, int(nz[0]))
            keep.append(i)
        T = np.concatenate([tab.T[keep][:, list(range(n)) + [n + m]], np.empty((1, n + 1), dtype=object)])
        basis = [tab.basis[i] for i in keep]
        T[-1, :n] = [to_fmpq(v) for v in c]
        T[-1, -1] = zero
        for i, bcol in enumerate(basis):
            cb = T[-1, bcol]
            if cb != 0:
                T[-1] = T[-1] - cb * T[i]
        tab = SimplexTableau(T, basis)
        status = tab.run(n, counter, max_iter, deadline)
    except _Limit:
        return SimplexOutcome("iteration-limit", None, None, counter[0])
    if status == "unbounded":
        return SimplexOutcome("unbounded", None, None, counter[0])
    x = [Fraction(0)] * n
    for i, bcol in enumerate(tab.basis):
        x[bcol] = to_fraction(tab.T[i, -1])
    obj = -to_fraction(tab.T[-1, -1])
    return SimplexOutcome("optimal", x, obj, counter[0], list(tab.basis))
