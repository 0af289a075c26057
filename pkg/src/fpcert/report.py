"""Analysis reports and their JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

from .bernstein import BernResult
from .core.interval import Interval
from .krivine import KSResult
from .rounding import ErrorForm

BOUND_FIELDS = ("linear", "total")
INTERVAL_FIELDS = ("linear_interval", "remainder")


@dataclass
class ReportEntry:
    benchmark: str
    method: str                          # bern | ks
    backend: str                         # exact | float
    n: int
    m: int
    d: int
    k: Any                               # multi-degree (bern) or order (ks)
    linear: Any                          # eps-scaled bound on |l|
    linear_interval: Tuple[Any, Any]
    remainder: Tuple[Any, Any]
    total: Any
    sharp: Optional[bool] = None
    lp_vars: Optional[int] = None
    lp_rows: Optional[int] = None
    seconds: float = 0.0
    certificate: str = "n/a"
    reference: Optional[str] = None
    ratio: Optional[float] = None

    def __post_init__(self):
        if self.method not in ("bern", "ks"):
            raise ValueError("method must be bern or ks")
        self.linear_interval = tuple(self.linear_interval)
        self.remainder = tuple(self.remainder)
        if isinstance(self.k, list):
            self.k = tuple(self.k)

    def consistent(self) -> bool:
        """total = max(|lo|, |hi|) of linear interval + remainder interval."""
        lin = Interval(*self.linear_interval)
        rem = Interval(*self.remainder)
        return (lin + rem).mag() == self.total

    def with_reference(self, ref: Optional[str]) -> "ReportEntry":
        self.reference = ref
        try:
            value = float(ref) if ref is not None else None
        except ValueError:
            value = None
        self.ratio = float(self.total) / value if value else None
        return self


def _scalar_out(v) -> Dict[str, str]:
    if isinstance(v, Fraction):
        return {"decimal": f"{float(v):.17g}", "exact": f"{v.numerator}/{v.denominator}"}
    return {"decimal": repr(float(v))}


def _scalar_in(d: Dict[str, str]):
    if "exact" in d:
        return Fraction(d["exact"])
    return float(d["decimal"])


def entry_to_dict(e: ReportEntry) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for f in fields(e):
        v = getattr(e, f.name)
        if f.name in BOUND_FIELDS:
            out[f.name] = _scalar_out(v)
        elif f.name in INTERVAL_FIELDS:
            out[f.name] = [_scalar_out(x) for x in v]
        elif f.name == "k":
            out[f.name] = list(v) if isinstance(v, tuple) else v
        else:
            out[f.name] = v
    return out


def entry_from_dict(d: Dict[str, Any]) -> ReportEntry:
    kw = dict(d)
    for name in BOUND_FIELDS:
        kw[name] = _scalar_in(d[name])
    for name in INTERVAL_FIELDS:
        kw[name] = tuple(_scalar_in(x) for x in d[name])
    return ReportEntry(**kw)


def to_json(entries: List[ReportEntry], indent: int = 2) -> str:
    return json.dumps([entry_to_dict(e) for e in entries], indent=indent)


def from_json(text: str) -> List[ReportEntry]:
    return [entry_from_dict(d) for d in json.loads(text)]


def bern_entry(name: str, ef: ErrorForm, res: BernResult) -> ReportEntry:
    lin = res.linear_interval
    linear = lin.hi if lin is not None else float("inf")
    li = (lin.lo, lin.hi) if lin is not None else (float("-inf"), float("inf"))
    return ReportEntry(name, "bern", res.backend.value, ef.nvars, ef.m, ef.degree, tuple(res.k_used),
                       linear, li, (res.remainder.lo, res.remainder.hi), res.total, sharp=res.sharp,
                       seconds=res.seconds)


def ks_entry(name: str, ef: ErrorForm, res: KSResult) -> ReportEntry:
    lin = res.linear_interval
    linear = max(abs(lin.lo), abs(lin.hi))
    return ReportEntry(name, "ks", res.backend.value, ef.nvars, ef.m, ef.degree, res.k_used, linear,
                       (lin.lo, lin.hi), (res.remainder.lo, res.remainder.hi), res.total,
                       lp_vars=res.lp_vars, lp_rows=res.lp_rows, seconds=res.seconds,
                       certificate=res.certificate_status)


def format_table(entries: List[ReportEntry]) -> str:
    head = f"{'benchmark':<12} {'method':<6} {'n':>3} {'m':>3} {'d':>3} {'k':<12} {'total':>11} {'ref':>9} {'ratio':>6} {'time':>7}"
    lines = [head, "-" * len(head)]
    for e in entries:
        k = ",".join(str(v) for v in e.k) if isinstance(e.k, tuple) else str(e.k)
        ratio = f"{e.ratio:.3f}" if e.ratio is not None else "-"
        lines.append(f"{e.benchmark:<12} {e.method:<6} {e.n:>3} {e.m:>3} {e.d:>3} {k:<12} "
                     f"{float(e.total):>11.3e} {e.reference or '-':>9} {ratio:>6} {e.seconds:>6.2f}s")
    return "\n".join(lines)
