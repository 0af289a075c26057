"""Command-line front end.

    fpcert analyze prog.fp [--method bern|ks|both] [--backend exact|float]
                           [--degree K | --order k] [--eps E] [--json]
                           [--export-lp PATH] [--max-elevations N]
    fpcert bench [--filter PATTERN] [--method ...] [--backend ...] [--json]

Exit status: 0 success, 1 parse error, 2 method inapplicable, 3 solver failure.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import List, Optional

from .bernstein import DEFAULT_MAX_ELEVATIONS, DegreeTooLow, fpbern_run
from .core.scalar import Backend
from .krivine import LPInfeasible, OrderTooLow, RationalBodyUnsupported, fpkristen_run
from .lp import SolverFailure
from .program import ParseError, parse_program
from .report import ReportEntry, bern_entry, format_table, ks_entry, to_json
from .rounding import CONSTANT_POLICIES, DEFAULT_EPS, RoundingPolicy, error_form

EXIT_OK, EXIT_PARSE, EXIT_INAPPLICABLE, EXIT_SOLVER = 0, 1, 2, 3


def parse_eps(text: str) -> Fraction:
    """'2^-53', '1/1024', '1e-8' or a decimal."""
    text = text.strip().replace("**", "^")
    if "^" in text:
        base, _, exp = text.partition("^")
        value = Fraction(int(base)) ** int(exp)
    else:
        value = Fraction(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("eps must lie strictly between 0 and 1")
    return value


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fpcert", description="Certified roundoff error bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="bound the roundoff error of one program")
    a.add_argument("file")
    a.add_argument("--method", choices=("bern", "ks", "both"), default="both")
    a.add_argument("--backend", choices=("exact", "float"), default="exact")
    deg = a.add_mutually_exclusive_group()
    deg.add_argument("--degree", type=_positive_int, help="Bernstein degree in every variable")
    deg.add_argument("--order", type=_positive_int, help="relaxation order of the LP hierarchy")
    a.add_argument("--eps", type=parse_eps, default=DEFAULT_EPS, help="unit roundoff (default 2^-53)")
    a.add_argument("--constants", choices=CONSTANT_POLICIES, default="inexact",
                   help="which literals get a rounding error (default: those not exact in binary64)")
    a.add_argument("--json", action="store_true", help="print the report as JSON")
    a.add_argument("--export-lp", metavar="PATH", help="write both LPs in LP file syntax")
    a.add_argument("--max-elevations", type=_nonneg_int, default=DEFAULT_MAX_ELEVATIONS)

    b = sub.add_parser("bench", help="run the bundled benchmark corpus")
    b.add_argument("--filter", default=None, help="glob over case names")
    b.add_argument("--method", choices=("bern", "ks", "both"), default="both")
    b.add_argument("--backend", choices=("exact", "float"), default="float")
    b.add_argument("--json", action="store_true")
    b.add_argument("--jobs", type=_positive_int, default=1)
    b.add_argument("--include-skippable", action="store_true", help="also run the (case, method) pairs marked heavy")
    return parser


def _print_entry(e: ReportEntry, eps: Fraction, out):
    coef = e.linear / eps if isinstance(e.linear, Fraction) else float(e.linear) / float(eps)
    coef_s = str(coef) if isinstance(coef, Fraction) else f"{coef:.6g}"
    k = ",".join(str(v) for v in e.k) if isinstance(e.k, tuple) else str(e.k)
    label = "degree" if e.method == "bern" else "order"
    print(f"[{e.method}] {e.benchmark}: n={e.n} m={e.m} d={e.d} {label}={k} backend={e.backend}", file=out)
    print(f"  linear bound: {coef_s}*eps = {float(e.linear):.6e}", file=out)
    print(f"  remainder:    [{float(e.remainder[0]):.6e}, {float(e.remainder[1]):.6e}]", file=out)
    print(f"  total bound:  {float(e.total):.6e}", file=out)
    if e.method == "bern":
        print(f"  sharp: {'yes' if e.sharp else 'no'}", file=out)
    else:
        print(f"  LP: {e.lp_vars} variables, {e.lp_rows} constraints; certificate {e.certificate}", file=out)
    print(f"  time: {e.seconds:.3f}s", file=out)


def analyze(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    try:
        with open(args.file) as fh:
            text = fh.read()
        prog = parse_program(text)
    except (ParseError, OSError) as exc:
        print(f"error: {args.file}: {exc}", file=err)
        return EXIT_PARSE
    policy = RoundingPolicy(constants=args.constants)
    ef = error_form(prog, args.eps, policy)
    backend = Backend(args.backend)
    methods = ["bern", "ks"] if args.method == "both" else [args.method]
    entries: List[ReportEntry] = []
    skipped = []
    for method in methods:
        try:
            if method == "bern":
                if prog.constraints:
                    raise RationalBodyUnsupported("the Bernstein engine needs box inputs (the program has constraints)")
                k = None if args.degree is None else (args.degree,) * prog.n
                res = fpbern_run(ef, prog.box, k=k, backend=backend, max_elevations=args.max_elevations)
                entries.append(bern_entry(prog.name, ef, res))
            else:
                res = fpkristen_run(ef, prog, k=args.order, backend=backend, export_lp=args.export_lp)
                entries.append(ks_entry(prog.name, ef, res))
        except (RationalBodyUnsupported, DegreeTooLow, OrderTooLow) as exc:
            if args.method != "both":
                print(f"error: {method}: {exc}", file=err)
                return EXIT_INAPPLICABLE
            skipped.append(f"{method}: {exc}")
        except (SolverFailure, LPInfeasible) as exc:
            print(f"error: {method}: {exc}", file=err)
            return EXIT_SOLVER
    if not entries:
        for s in skipped:
            print(f"error: {s}", file=err)
        return EXIT_INAPPLICABLE
    if args.json:
        print(to_json(entries), file=out)
    else:
        for e in entries:
            _print_entry(e, Fraction(args.eps), out)
        for s in skipped:
            print(f"skipped {s}", file=out)
    return EXIT_OK


def bench(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    from .bench import run_benchmarks

    methods = ("bern", "ks") if args.method == "both" else (args.method,)
    report = run_benchmarks(args.filter, methods, Backend(args.backend),
                            include_skippable=args.include_skippable, jobs=args.jobs)
    if args.json:
        print(to_json(report.entries), file=out)
    else:
        print(format_table(report.entries), file=out)
    for (name, method), msg in sorted(report.failures.items()):
        print(f"failed: {name} [{method}]: {msg}", file=err)
    return EXIT_OK if not report.failures else EXIT_SOLVER


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "analyze":
        return analyze(args)
    return bench(args)


if __name__ == "__main__":
    sys.exit(main())
