"""Sparse Krivine-Stengle LP relaxations of the linear error form.

With y = (x, e), x scaled to the unit box and e in [-1, 1]^m, the set
K x [-1,1]^m is described by 0 <= g_i <= 1 for the normalized input
constraints g_1..g_p and g_{p+j} = (1 + e_j)/2.  The lower bound of
l' = sum_j s_j(x) e_j at order k is

    max t   s.t.   l' - t = sum_j phi_j,
    phi_j = sum_{|a|+|b| <= k} lambda_{j,a,b} g^a (1 - g)^b,   lambda >= 0,

where block j only uses the constraints g_1..g_p, g_{p+j} and hence only
the variables x, e_j.  The upper bound solves min t with t - l' on the left.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bernstein import scale_to_unit_box
from .core.expr import interval_eval
from .core.interval import Interval
from .core.polynomial import MultiIndex, Polynomial, monomials_up_to
from .core.scalar import Backend, exact, widen_up
from .lp import LPProblem, SolverFailure, VerifiedBound, solve_lp, verify_certificate
from .program import Program
from .rounding import ErrorForm, bound_remainder

# above this many columns the exact backend solves in doubles and repairs
EXACT_SIMPLEX_MAX_COLS = 5000

DIRECTIONS = ("lower", "upper")


class RationalBodyUnsupported(ValueError):
    """The Krivine-Stengle engine handles polynomial programs only."""


class OrderTooLow(ValueError):
    pass


class UnboundedConstraint(ValueError):
    pass


class LPInfeasible(RuntimeError):
    pass


# -- constraints --------------------------------------------------------------

@dataclass
class NormalizedConstraints:
    """Polynomials over the unit-box coordinates with 0 <= g_i <= 1 on K.

    The user constraints come first, then the coordinates y_1..y_n.
    """

    g: List[Polynomial]
    scale_log: List[str] = field(default_factory=list)
    n_user: int = 0

    @property
    def p(self) -> int:
        return len(self.g)

    @property
    def nvars(self) -> int:
        return self.g[0].nvars if self.g else 0


def normalize_constraints(prog: Program, box: Sequence[Interval] | None = None) -> NormalizedConstraints:
    """Scale each user constraint to the unit box and divide it by an interval upper bound."""
    box = list(box if box is not None else prog.box)
    n = prog.n
    log = []
    g: List[Polynomial] = []
    for idx, (expr, poly) in enumerate(zip(prog.constraints, prog.constraint_polynomials())):
        bound = interval_eval(expr, [Interval(exact(b.lo), exact(b.hi)) for b in box])
        u = bound.hi
        if not math.isfinite(float(u)):
            raise UnboundedConstraint(f"constraint {idx + 1} has no finite upper bound on the box")
        if u <= 0:
            raise UnboundedConstraint(f"constraint {idx + 1} is never positive on the box")
        scaled = scale_to_unit_box(poly, box).scale(Fraction(1) / u)
        g.append(scaled)
        log.append(f"constraint {idx + 1}: x -> unit box, divided by interval bound {u}")
    for i in range(n):
        g.append(Polynomial.variable(n, i))
        log.append(f"coordinate {prog.var_names[i]}: [{box[i].lo}, {box[i].hi}] -> [0, 1]")
    return NormalizedConstraints(g, log, len(prog.constraints))


def build_error_box_constraints(m: int) -> List[Polynomial]:
    """(1 + e_j)/2 for j = 1..m, as polynomials in e_1..e_m."""
    if m < 1:
        raise ValueError("m must be at least 1")
    half = Fraction(1, 2)
    return [Polynomial(m, {(0,) * m: half, tuple(int(i == j) for i in range(m)): half}) for j in range(m)]


@dataclass(frozen=True)
class SparsityPattern:
    """Blocks I_j = {x_1..x_n, e_j} and J_j = {g_1..g_p, g_{p+j}} (0-based indices)."""

    n: int
    p: int
    m: int

    @property
    def blocks(self) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
        xs = tuple(range(self.n))
        gs = tuple(range(self.p))
        return [(xs + (self.n + j,), gs + (self.p + j,)) for j in range(self.m)]

    def covers(self) -> bool:
        blocks = self.blocks
        vs = set().union(*(set(b[0]) for b in blocks)) if blocks else set()
        cs = set().union(*(set(b[1]) for b in blocks)) if blocks else set()
        return vs == set(range(self.n + self.m)) and cs == set(range(self.p + self.m))

    def running_intersection(self) -> bool:
        blocks = [set(b[0]) for b in self.blocks]
        for j in range(1, len(blocks)):
            before = set().union(*blocks[:j])
            inter = blocks[j] & before
            if not any(inter <= blocks[i] for i in range(j)):
                return False
        return True


# -- assembly -----------------------------------------------------------------

def _product_table(factors: Sequence[Polynomial], k: int, nv: int) -> Dict[MultiIndex, Polynomial]:
    """prod_i factors[i]^a_i for every exponent vector a with |a| <= k."""
    table: Dict[MultiIndex, Polynomial] = {}
    for a in monomials_up_to(len(factors), k):
        if sum(a) == 0:
            table[a] = Polynomial.constant(nv, 1)
            continue
        i = next(t for t, v in enumerate(a) if v)
        prev = a[:i] + (a[i] - 1,) + a[i + 1:]
        table[a] = table[prev] * factors[i]
    return table


def _univariate_e(k: int) -> Dict[Tuple[int, int], Dict[int, Fraction]]:
    """((1+e)/2)^c ((1-e)/2)^d as {power: coefficient} for c + d <= k."""
    out = {}
    for c in range(k + 1):
        for d in range(k + 1 - c):
            coeffs = {}
            for i in range(c + 1):
                for j in range(d + 1):
                    v = Fraction(math.comb(c, i) * math.comb(d, j) * (-1) ** j, 2 ** (c + d))
                    coeffs[i + j] = coeffs.get(i + j, Fraction(0)) + v
            out[(c, d)] = {a: v for a, v in coeffs.items() if v}
    return out


@dataclass
class _Template:
    """One block's columns, with rows split into shared x-rows and own e-rows."""

    exps: List[MultiIndex]              # (alpha', gamma, beta', delta) per column
    x_monos: List[MultiIndex]
    e_rows: List[Tuple[MultiIndex, int]]
    is_x: np.ndarray
    row: np.ndarray
    col: np.ndarray
    vals: np.ndarray
    exact_vals: Optional[np.ndarray]


def _block_template(nc: NormalizedConstraints, k: int) -> _Template:
    n, p = nc.nvars, nc.p
    one_minus = [1 - g for g in nc.g]
    xfac = _product_table(list(nc.g) + one_minus, k, n)
    efac = _univariate_e(k)
    x_monos = list(monomials_up_to(n, k))
    x_index = {a: i for i, a in enumerate(x_monos)}
    e_rows = [(a, c) for c in range(1, k + 1) for a in monomials_up_to(n, k - c)]
    e_rows.sort(key=lambda r: (sum(r[0]) + r[1], r[1], r[0]))
    e_index = {r: i for i, r in enumerate(e_rows)}
    exps = list(monomials_up_to(2 * (p + 1), k))
    is_x, row, col, vals = [], [], [], []
    for c, ex in enumerate(exps):
        alpha, gamma = ex[:p], ex[p]
        beta, delta = ex[p + 1:2 * p + 1], ex[2 * p + 1]
        px = xfac[alpha + beta]
        pe = efac[(gamma, delta)]
        for mono, cx in px.terms.items():
            for a, ce in pe.items():
                v = cx * ce
                # nonlinear constraints reach monomials above degree k
                if a == 0:
                    is_x.append(True)
                    if mono not in x_index:
                        x_index[mono] = len(x_monos)
                        x_monos.append(mono)
                    row.append(x_index[mono])
                else:
                    is_x.append(False)
                    if (mono, a) not in e_index:
                        e_index[(mono, a)] = len(e_rows)
                        e_rows.append((mono, a))
                    row.append(e_index[(mono, a)])
                col.append(c)
                vals.append(v)
    fl = np.array([float(v) for v in vals], dtype=float)
    dyadic = all(Fraction(f) == v for f, v in zip(fl.tolist(), vals))
    exact_vals = None
    if not dyadic:
        exact_vals = np.empty(len(vals), dtype=object)
        exact_vals[:] = vals
    return _Template(exps, x_monos, e_rows, np.array(is_x, dtype=bool), np.array(row, dtype=np.int64),
                     np.array(col, dtype=np.int64), fl, exact_vals)


@dataclass
class KSAssembly:
    """Columns shared by the lower and upper LPs of one program."""

    n: int
    p: int
    m: int
    k: int
    lprime: List[Polynomial]          # s_j over unit-box coordinates
    template: _Template
    rows: np.ndarray                  # lambda entries only; t is added per direction
    cols: np.ndarray
    vals: np.ndarray
    exact_vals: Optional[np.ndarray]
    nrows: int
    ncols: int
    row_labels: List[str]

    def column_label(self, c: int):
        if c == 0:
            return "t"
        nb = len(self.template.exps)
        j, local = divmod(c - 1, nb)
        ex = self.template.exps[local]
        p = self.p
        return (j, ex[:p] + (ex[p],), ex[p + 1:2 * p + 1] + (ex[2 * p + 1],))

    def rhs(self, direction: str) -> List[Fraction]:
        tpl = self.template
        nx = len(tpl.x_monos)
        ne = len(tpl.e_rows)
        e_index = {r: i for i, r in enumerate(tpl.e_rows)}
        out = [Fraction(0)] * self.nrows
        sign = 1 if direction == "lower" else -1
        for j, s in enumerate(self.lprime):
            for mono, c in s.terms.items():
                key = (mono, 1)
                if key not in e_index:
                    raise OrderTooLow(f"order {self.k} is below the degree of l'")
                out[nx + j * ne + e_index[key]] += sign * exact(c)
        return out

    def problem(self, direction: str) -> LPProblem:
        if direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        t_coef = 1.0 if direction == "lower" else -1.0
        rows = np.concatenate([[0], self.rows])
        cols = np.concatenate([[0], self.cols])
        vals = np.concatenate([[t_coef], self.vals])
        ev = None
        if self.exact_vals is not None:
            ev = np.empty(len(vals), dtype=object)
            ev[0] = Fraction(int(t_coef))
            ev[1:] = self.exact_vals
        return LPProblem(self.nrows, self.ncols, rows, cols, vals, self.rhs(direction),
                         "max" if direction == "lower" else "min", ev, self.row_labels)


def lprime_degree(s: Sequence[Polynomial]) -> int:
    return max((p.degree() for p in s if not p.is_zero()), default=0) + 1


def assemble(s: Sequence[Polynomial], nc: NormalizedConstraints, k: int) -> KSAssembly:
    """Sparse assembly of both LPs.  ``s`` are the s_j over unit-box coordinates."""
    m = len(s)
    if m < 1:
        raise ValueError("at least one error variable is needed")
    if k < lprime_degree(s):
        raise OrderTooLow(f"order {k} is below deg l' = {lprime_degree(s)}")
    n, p = nc.nvars, nc.p
    tpl = _block_template(nc, k)
    nx, ne, nb = len(tpl.x_monos), len(tpl.e_rows), len(tpl.exps)
    blocks = np.arange(m, dtype=np.int64)[:, None]
    rows = np.where(tpl.is_x[None, :], tpl.row[None, :], nx + blocks * ne + tpl.row[None, :]).ravel()
    cols = (1 + blocks * nb + tpl.col[None, :]).ravel()
    vals = np.tile(tpl.vals, m)
    ev = np.tile(tpl.exact_vals, m) if tpl.exact_vals is not None else None
    labels = [_mono_label(a, 0, n) for a in tpl.x_monos]
    for j in range(m):
        labels.extend(_mono_label(a, c, n, j) for a, c in tpl.e_rows)
    return KSAssembly(n, p, m, k, list(s), tpl, rows, cols, vals, ev, nx + m * ne, 1 + m * nb, labels)


def _mono_label(a: MultiIndex, c: int, n: int, j: int = 0) -> str:
    parts = [f"y{i + 1}^{v}" if v > 1 else f"y{i + 1}" for i, v in enumerate(a) if v]
    if c:
        parts.append(f"e{j + 1}^{c}" if c > 1 else f"e{j + 1}")
    return "*".join(parts) if parts else "1"


def assemble_lp(s: Sequence[Polynomial], nc: NormalizedConstraints, k: int, direction: str = "lower") -> LPProblem:
    return assemble(s, nc, k).problem(direction)


def assemble_dense_lp(s: Sequence[Polynomial], nc: NormalizedConstraints, k: int,
                      direction: str = "lower") -> LPProblem:
    """Non-sparse relaxation: one certificate over all of (x, e) with all p + m constraints."""
    m = len(s)
    n, p = nc.nvars, nc.p
    nv = n + m
    if k < lprime_degree(s):
        raise OrderTooLow(f"order {k} is below deg l' = {lprime_degree(s)}")
    pos = list(range(n))
    g = [gi.embed(nv, pos) for gi in nc.g]
    g += [e.embed(nv, list(range(n, nv))) for e in build_error_box_constraints(m)]
    factors = g + [1 - gi for gi in g]
    table = _product_table(factors, k, nv)
    monos = list(monomials_up_to(nv, k))
    index = {a: i for i, a in enumerate(monos)}
    t_coef = Fraction(1 if direction == "lower" else -1)
    rows, cols, vals = [0], [0], [t_coef]
    exps = list(monomials_up_to(len(factors), k))
    for c, ex in enumerate(exps, start=1):
        for mono, v in table[ex].terms.items():
            rows.append(index[mono])
            cols.append(c)
            vals.append(exact(v))
    rhs = [Fraction(0)] * len(monos)
    sign = 1 if direction == "lower" else -1
    for j, sj in enumerate(s):
        for mono, c in sj.terms.items():
            rhs[index[mono + tuple(int(i == j) for i in range(m))]] += sign * exact(c)
    ev = np.empty(len(vals), dtype=object)
    ev[:] = vals
    return LPProblem(len(monos), 1 + len(exps), np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64),
                     np.array([float(v) for v in vals]), rhs, "max" if direction == "lower" else "min", ev)


def sparse_lp_dims(n: int, p: int, m: int, k: int) -> Tuple[int, int]:
    """(variables, rows) of the sparse LP when K is the box (p = n)."""
    nvars = m * math.comb(2 * (p + 1) + k, k) + 1
    nrows = math.comb(n + k, k) + m * (math.comb(n + 1 + k, k) - math.comb(n + k, k))
    return nvars, nrows


# -- solving --------------------------------------------------------------------

@dataclass
class KSCertificate:
    t: Fraction
    lambdas: Dict[tuple, Fraction]
    direction: str
    status: str                      # exact | repaired
    residual_l1: Fraction = Fraction(0)
    raw_t: Optional[Fraction] = None

    def __post_init__(self):
        if any(v < 0 for v in self.lambdas.values()):
            raise ValueError("certificate weights must be nonnegative")


def ks_bound(lp: LPProblem, backend: str = "exact", assembly: KSAssembly | None = None,
             budget_secs: float | None = None) -> Tuple[Fraction, KSCertificate]:
    """Solve one direction and return the certified bound with its certificate."""
    solver = backend
    if backend == "exact" and lp.ncols > EXACT_SIMPLEX_MAX_COLS:
        solver = "float"
    res = solve_lp(lp, solver, budget_secs=budget_secs)
    if res.status == "infeasible":
        raise LPInfeasible("relaxation is infeasible at this order; try a larger order")
    if not res.optimal:
        raise SolverFailure(res)
    checked: VerifiedBound = verify_certificate(lp, res.t, res.lambdas)
    label = assembly.column_label if assembly is not None else (lambda c: c)
    lambdas = {label(j): Fraction(v) for j, v in res.lambdas.items() if v > 0}
    direction = "lower" if lp.sense == "max" else "upper"
    cert = KSCertificate(checked.bound, lambdas, direction, "exact" if checked.exact else "repaired",
                         checked.residual_l1, checked.raw)
    return checked.bound, cert


def reconstruct(assembly: KSAssembly, cert: KSCertificate) -> Dict[Tuple[int, MultiIndex, int], Fraction]:
    """sum_j phi_j (+ t) from the certificate, keyed like the LP rows: (block, x-monomial, e-power)."""
    tpl = assembly.template
    p = assembly.p
    out: Dict[tuple, Fraction] = {}
    x_key = {i: (None, a, 0) for i, a in enumerate(tpl.x_monos)}
    sign = 1 if cert.direction == "lower" else -1
    out[(None, tpl.x_monos[0], 0)] = sign * cert.t
    exp_index = {ex: c for c, ex in enumerate(tpl.exps)}
    by_col: Dict[int, List[int]] = {}
    for i, c in enumerate(tpl.col.tolist()):
        by_col.setdefault(c, []).append(i)
    for (j, alpha, beta), lam in cert.lambdas.items():
        ex = alpha[:p] + (alpha[p],) + beta[:p] + (beta[p],)
        c = exp_index[ex]
        for i in by_col.get(c, []):
            v = Fraction(float(tpl.vals[i])) if tpl.exact_vals is None else tpl.exact_vals[i]
            r = int(tpl.row[i])
            key = x_key[r] if tpl.is_x[i] else (j,) + tpl.e_rows[r]
            out[key] = out.get(key, Fraction(0)) + lam * v
    return {key: v for key, v in out.items() if v != 0}


@dataclass
class KSResult:
    lower: Fraction                  # certified lower bound on l'
    upper: Fraction                  # certified upper bound on l'
    linear: Fraction                 # max(|lower|, |upper|)
    linear_interval: Interval        # eps-scaled
    remainder: Interval
    total: object
    k_used: int
    lp_vars: int
    lp_rows: int
    certificates: List[KSCertificate]
    seconds: float = 0.0
    backend: Backend = Backend.EXACT

    @property
    def certificate_status(self) -> str:
        if not self.certificates:
            return "trivial"
        return "exact" if all(c.status == "exact" for c in self.certificates) else "repaired"


def default_order(prog: Program) -> int:
    return prog.degree() + 1


def fpkristen_run(ef: ErrorForm, prog: Program, k: int | None = None, backend: Backend = Backend.EXACT,
                  budget_secs: float | None = None, export_lp: str | None = None) -> KSResult:
    """Bound |fhat - f| over K with the two sparse LPs and the Hessian remainder."""
    start = time.perf_counter()
    if not prog.is_polynomial() or not ef.is_polynomial:
        raise RationalBodyUnsupported("the Krivine-Stengle engine needs a polynomial program")
    backend = Backend(backend)
    box = prog.box
    if k is None:
        k = default_order(prog)
    zero = Fraction(0)
    if ef.m == 0:
        z = Interval(zero, zero) if backend is Backend.EXACT else Interval(0.0, 0.0)
        return KSResult(zero, zero, zero, z, z, z.lo, k, 0, 0, [], time.perf_counter() - start, backend)
    nc = normalize_constraints(prog, box)
    s = [scale_to_unit_box(sj, box) for sj in ef.s_polynomials()]
    asm = assemble(s, nc, k)
    lp_backend = "exact" if backend is Backend.EXACT else "float"
    bounds, certs = {}, []
    for direction in DIRECTIONS:
        lp = asm.problem(direction)
        if export_lp:
            from .lp import export_lp as _export

            _export(lp, _direction_path(export_lp, direction), comment=f"{direction} bound of l', order {k}")
        bounds[direction], cert = ks_bound(lp, lp_backend, asm, budget_secs)
        certs.append(cert)
    lo, hi = bounds["lower"], bounds["upper"]
    lin = max(abs(lo), abs(hi))
    rem = bound_remainder(ef, box, backend)
    eps = exact(ef.eps)
    if backend is Backend.EXACT:
        li = Interval(eps * lo, eps * hi)
        total = (li + rem).mag()
    else:
        li = Interval(-widen_up(-eps * lo), widen_up(eps * hi))
        total = (li + rem).mag()
    return KSResult(lo, hi, lin, li, rem, total, k, asm.ncols, asm.nrows, certs,
                    time.perf_counter() - start, backend)


def _direction_path(path: str, direction: str) -> str:
    if "{direction}" in path:
        return path.format(direction=direction)
    stem, dot, ext = path.rpartition(".")
    if not dot:
        return f"{path}.{direction}"
    return f"{stem}.{direction}.{ext}"
