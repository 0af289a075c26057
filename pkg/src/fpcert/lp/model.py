"""LP data shared by the assembler, the solvers and the certificate checker.

An ``LPProblem`` is an equality-form LP in one free variable t (column 0)
and nonnegative weights (columns 1..ncols-1):

    max t  (or min t)   s.t.   A [t; lambda] = rhs,   lambda >= 0.

The matrix is stored in coordinate form.  ``vals`` holds doubles for the
float path; ``exact_vals`` holds the exact entries when some double is not
exact (None means every entry of ``vals`` is exact as written).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp

SENSES = ("max", "min")
STATUSES = ("optimal", "infeasible", "unbounded", "iteration-limit")


@dataclass
class LPProblem:
    nrows: int
    ncols: int
    rows: np.ndarray
    cols: np.ndarray
    vals: np.ndarray
    rhs: List[Fraction]
    sense: str = "max"
    exact_vals: Optional[np.ndarray] = None
    row_labels: Optional[List[str]] = None
    col_labels: Optional[List[Any]] = None

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ValueError(f"sense must be one of {SENSES}")
        if len(self.rhs) != self.nrows:
            raise ValueError("rhs length differs from the row count")
        if not (len(self.rows) == len(self.cols) == len(self.vals)):
            raise ValueError("coordinate arrays differ in length")
        if self.exact_vals is not None and len(self.exact_vals) != len(self.vals):
            raise ValueError("exact values differ in length")
        if len(self.rows) and (self.rows.max() >= self.nrows or self.cols.max() >= self.ncols):
            raise ValueError("coordinate out of range")

    @property
    def nnz(self) -> int:
        return int(len(self.vals))

    @property
    def n_lambdas(self) -> int:
        return self.ncols - 1

    def exact_entry(self, i: int) -> Fraction:
        if self.exact_vals is not None:
            return self.exact_vals[i]
        return Fraction(float(self.vals[i]))

    def exact_entries(self) -> List[Fraction]:
        if self.exact_vals is not None:
            return list(self.exact_vals)
        return [Fraction(v) for v in self.vals.tolist()]

    def float_matrix(self) -> sp.csc_matrix:
        return sp.csc_matrix((self.vals, (self.rows, self.cols)), shape=(self.nrows, self.ncols))

    def exact_dense(self) -> List[List[Fraction]]:
        a = [[Fraction(0)] * self.ncols for _ in range(self.nrows)]
        for r, c, v in zip(self.rows.tolist(), self.cols.tolist(), self.exact_entries()):
            a[r][c] += v
        return a

    def column_entries(self, support: Sequence[int]) -> Dict[int, List[tuple]]:
        """Exact (row, value) pairs of the given columns."""
        wanted = np.zeros(self.ncols, dtype=bool)
        wanted[list(support)] = True
        idx = np.nonzero(wanted[self.cols])[0]
        out: Dict[int, List[tuple]] = {c: [] for c in support}
        for i in idx.tolist():
            out[int(self.cols[i])].append((int(self.rows[i]), self.exact_entry(i)))
        return out


@dataclass
class SolveResult:
    status: str
    t: Optional[object] = None
    lambdas: Dict[int, object] = field(default_factory=dict)
    iterations: int = 0
    backend: str = "exact"
    message: str = ""

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"status must be one of {STATUSES}")

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


class SolverFailure(RuntimeError):
    def __init__(self, result: SolveResult):
        self.result = result
        super().__init__(f"LP solve ended with status {result.status}: {result.message}".rstrip(": "))
