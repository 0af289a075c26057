"""LP solving: exact rational simplex, HiGHS float path, certificate repair."""

from .certificate import VerifiedBound, residual, verify_certificate
from .lpformat import LPFormatError, export_lp, import_lp, read_lp, write_lp
from .model import LPProblem, SolveResult, SolverFailure
from .simplex import simplex
from .solve import solve_lp, solver_budget

__all__ = [
    "LPFormatError", "LPProblem", "SolveResult", "SolverFailure", "VerifiedBound",
    "export_lp", "import_lp", "read_lp", "write_lp",
    "residual", "simplex", "solve_lp", "solver_budget", "verify_certificate",
]
