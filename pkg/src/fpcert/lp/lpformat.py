"""Export and import of ``LPProblem`` in the CPLEX LP file syntax.

    \\ comment
    Maximize
     obj: + t
    Subject To
     r0: + t + 0.5 l1 - l2 = 1
    Bounds
     t free
    End

Coefficients are written with ``repr(float)``, so doubles survive a round
trip bit for bit; exact entries that are not doubles are rounded on export.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import List, TextIO

import numpy as np

from .model import LPProblem

MAX_LINE = 200


def _num(v: float) -> str:
    v = float(v)
    if v == int(v) and abs(v) < 2 ** 53:
        return str(int(v))
    return repr(v)


def _term(coef: float, name: str) -> str:
    sign = "-" if coef < 0 else "+"
    mag = abs(coef)
    return f"{sign} {name}" if mag == 1 else f"{sign} {_num(mag)} {name}"


def _col_name(j: int) -> str:
    return "t" if j == 0 else f"l{j}"


def _wrap(head: str, parts: List[str], tail: str) -> List[str]:
    lines, cur = [], head
    for p in parts:
        if len(cur) + len(p) + 1 > MAX_LINE:
            lines.append(cur)
            cur = "   "
        cur += " " + p
    cur += tail
    lines.append(cur)
    return lines


def write_lp(lp: LPProblem, out: TextIO, comment: str = ""):
    for line in comment.splitlines():
        out.write(f"\\ {line}\n")
    out.write("Maximize\n" if lp.sense == "max" else "Minimize\n")
    out.write(" obj: + t\n")
    out.write("Subject To\n")
    order = np.lexsort((lp.cols, lp.rows))
    rows, cols, vals = lp.rows[order], lp.cols[order], lp.vals[order]
    starts = np.searchsorted(rows, np.arange(lp.nrows + 1))
    for r in range(lp.nrows):
        lo, hi = starts[r], starts[r + 1]
        acc = {}
        for c, v in zip(cols[lo:hi].tolist(), vals[lo:hi].tolist()):
            acc[c] = acc.get(c, 0.0) + v
        parts = [_term(v, _col_name(c)) for c, v in sorted(acc.items()) if v != 0]
        if not parts:
            parts = ["0 t"]
        for line in _wrap(f" r{r}:", parts, f" = {_num(float(lp.rhs[r]))}"):
            out.write(line + "\n")
    out.write("Bounds\n t free\n")
    out.write(f"\\ columns {lp.ncols}\n")
    out.write("End\n")


def export_lp(lp: LPProblem, path: str, comment: str = ""):
    with open(path, "w") as fh:
        write_lp(lp, fh, comment)


_TERM = re.compile(r"([+-])\s*(?:([0-9.eE+-]+)\s+)?([A-Za-z_][A-Za-z_0-9]*)")


class LPFormatError(ValueError):
    pass


def read_lp(text: str) -> LPProblem:
    sense = None
    section = None
    ncols = None
    rows, cols, vals, rhs = [], [], [], []
    pending = ""

    def col_index(name: str) -> int:
        if name == "t":
            return 0
        if name.startswith("l") and name[1:].isdigit():
            return int(name[1:])
        raise LPFormatError(f"unknown column {name!r}")

    def flush_row(stmt: str):
        label, _, body = stmt.partition(":")
        if not label.strip().startswith("r"):
            raise LPFormatError(f"bad row label {label!r}")
        r = int(label.strip()[1:])
        lhs, eq, b = body.rpartition("=")
        if not eq:
            raise LPFormatError(f"row {label.strip()} is not an equality")
        while len(rhs) <= r:
            rhs.append(Fraction(0))
        rhs[r] = Fraction(float(b))
        lhs = lhs.strip()
        if lhs == "0 t":
            return
        if not lhs.startswith(("+", "-")):
            lhs = "+ " + lhs
        for m in _TERM.finditer(lhs):
            sign, coef, name = m.groups()
            v = float(coef) if coef else 1.0
            rows.append(r)
            cols.append(col_index(name))
            vals.append(-v if sign == "-" else v)

    for raw in text.splitlines():
        if raw.startswith("\\"):
            m = re.match(r"\\ columns (\d+)", raw)
            if m:
                ncols = int(m.group(1))
            continue
        line = raw.strip()
        key = line.lower()
        if key in ("maximize", "minimize"):
            sense = "max" if key == "maximize" else "min"
            section = "obj"
            continue
        if key == "subject to":
            section = "rows"
            continue
        if key in ("bounds", "end"):
            if pending:
                flush_row(pending)
                pending = ""
            section = key
            continue
        if not line:
            continue
        if section == "rows":
            if raw.startswith("    ") and pending:
                pending += " " + line
            else:
                if pending:
                    flush_row(pending)
                pending = line
        elif section == "bounds":
            if line != "t free":
                raise LPFormatError(f"unsupported bound {line!r}")
        elif section == "obj":
            if line.replace(" ", "") != "obj:+t":
                raise LPFormatError("objective must be t")
    if sense is None:
        raise LPFormatError("missing objective section")
    if ncols is None:
        ncols = (max(cols) + 1) if cols else 1
    return LPProblem(
        nrows=len(rhs), ncols=ncols,
        rows=np.array(rows, dtype=np.int64), cols=np.array(cols, dtype=np.int64),
        vals=np.array(vals, dtype=float), rhs=rhs, sense=sense,
    )


def import_lp(path: str) -> LPProblem:
    with open(path) as fh:
        return read_lp(fh.read())
