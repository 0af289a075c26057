"""Run the corpus through the engines and compare with the stored references."""

from __future__ import annotations

import fnmatch
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from ..bernstein import fpbern_run
from ..core.scalar import Backend
from ..krivine import fpkristen_run
from ..report import ReportEntry, bern_entry, ks_entry
from ..rounding import DEFAULT_POLICY, RoundingPolicy, error_form
from .corpus import METHOD_COLUMN, BenchmarkCase, get_case, load_corpus

METHODS = ("bern", "ks")


@dataclass
class CorpusReport:
    entries: List[ReportEntry] = field(default_factory=list)
    failures: Dict[Tuple[str, str], str] = field(default_factory=dict)

    def entry(self, name: str, method: str) -> Optional[ReportEntry]:
        for e in self.entries:
            if e.benchmark == name and e.method == method:
                return e
        return None

    def tighter(self, name: str) -> Optional[str]:
        """Which engine gave the smaller total, or "tie"; None unless both ran."""
        b, k = self.entry(name, "bern"), self.entry(name, "ks")
        if b is None or k is None:
            return None
        if b.total == k.total:
            return "tie"
        return "bern" if b.total < k.total else "ks"


def run_case(case: BenchmarkCase, method: str, backend: Backend | str = Backend.FLOAT,
             policy: RoundingPolicy = DEFAULT_POLICY, budget_secs: float | None = None) -> ReportEntry:
    prog = case.program()
    ef = error_form(prog, policy=policy)
    if method == "bern":
        entry = bern_entry(case.name, ef, fpbern_run(ef, prog.box, backend=Backend(backend)))
    elif method == "ks":
        entry = ks_entry(case.name, ef, fpkristen_run(ef, prog, backend=Backend(backend), budget_secs=budget_secs))
    else:
        raise ValueError(f"unknown method {method!r}")
    ref = case.references.get(METHOD_COLUMN[method])
    return entry.with_reference(ref.value if ref is not None else None)


def _job(args):
    name, method, backend, policy, budget = args
    try:
        return name, method, run_case(get_case(name), method, backend, policy, budget), None
    except Exception as exc:  # recorded per case, the run continues
        return name, method, None, f"{type(exc).__name__}: {exc}"


def select_cases(pattern: str | None = None) -> List[BenchmarkCase]:
    return [c for c in load_corpus() if not pattern or fnmatch.fnmatch(c.name, pattern)]


def select_runs(pattern: str | None = None, methods: Sequence[str] = METHODS,
                include_skippable: bool = False) -> List[Tuple[BenchmarkCase, str]]:
    """Applicable (case, method) pairs; heavy runs need include_skippable or an exact name."""
    out = []
    for case in select_cases(pattern):
        for method in methods:
            if not case.applies(method):
                continue
            if case.is_heavy(method) and not include_skippable and pattern != case.name:
                continue
            out.append((case, method))
    return out


def run_benchmarks(pattern: str | None = None, methods: Sequence[str] = METHODS,
                   backend: Backend | str = Backend.FLOAT, policy: RoundingPolicy = DEFAULT_POLICY,
                   include_skippable: bool = False, jobs: int = 1,
                   budget_secs: float | None = None) -> CorpusReport:
    """One entry per applicable (case, method), ordered by case name then method."""
    tasks = [(case.name, method, Backend(backend).value, policy, budget_secs)
             for case, method in select_runs(pattern, methods, include_skippable)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_job, tasks))
    else:
        results = [_job(t) for t in tasks]
    report = CorpusReport()
    for name, method, entry, error in sorted(results, key=lambda r: (r[0], r[1])):
        if entry is not None:
            report.entries.append(entry)
        else:
            report.failures[(name, method)] = error
    return report
