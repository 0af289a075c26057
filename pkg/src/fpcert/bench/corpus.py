"""Bundled benchmark programs and their published reference bounds."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Dict, List, Optional, Tuple

from ..program import Program, parse_program

TOOLS = ("FPBern(a)", "FPBern(b)", "FPKriSten", "Real2Float", "Rosa", "FPTaylor")
METHOD_COLUMN = {"bern": "FPBern(a)", "ks": "FPKriSten"}

# n, m, d and one value per tool, verbatim ("-" marks a tool that does not apply)
REFERENCE_TABLE: Dict[str, Tuple[int, int, int, Tuple[str, ...]]] = {
    "rigidBody1": (3, 10, 3, ("5.33e-13", "5.33e-13", "5.33e-13", "5.33e-13", "5.08e-13", "3.87e-13")),
    "rigidBody2": (3, 15, 5, ("6.48e-11", "6.48e-11", "6.48e-11", "6.48e-11", "6.48e-11", "5.24e-11")),
    "kepler0": (6, 21, 3, ("1.08e-13", "1.08e-13", "1.08e-13", "1.18e-13", "1.16e-13", "1.05e-13")),
    "kepler1": (4, 28, 4, ("4.23e-13", "4.23e-13", "4.23e-13", "4.47e-13", "6.49e-13", "4.49e-13")),
    "kepler2": (6, 42, 4, ("2.03e-12", "2.03e-12", "2.03e-12", "2.09e-12", "2.89e-12", "2.10e-12")),
    "sineTaylor": (1, 13, 8, ("5.51e-16", "5.51e-16", "5.51e-16", "6.03e-16", "9.56e-16", "6.75e-16")),
    "sineOrder3": (1, 6, 4, ("1.35e-15", "1.35e-15", "1.25e-15", "1.19e-15", "1.11e-15", "9.97e-16")),
    "sqroot": (1, 15, 5, ("1.29e-15", "1.29e-15", "1.29e-15", "1.29e-15", "8.41e-16", "7.13e-16")),
    "himmilbeau": (2, 11, 5, ("2.00e-12", "2.00e-12", "1.97e-12", "1.43e-12", "1.43e-12", "1.32e-12")),
    "schwefel": (3, 15, 5, ("1.48e-11", "1.48e-11", "1.48e-11", "1.49e-11", "1.49e-11", "1.03e-11")),
    "magnetism": (7, 27, 3, ("1.27e-14", "1.27e-14", "1.27e-14", "1.27e-14", "1.27e-14", "7.61e-15")),
    "caprasse": (4, 34, 5, ("4.49e-15", "4.49e-15", "4.49e-15", "5.63e-15", "5.96e-15", "3.04e-15")),
    "ex-2-2-5": (2, 9, 3, ("2.23e-14", "2.23e-14", "2.23e-14", "2.23e-14", "2.23e-14", "1.96e-14")),
    "ex-2-2-10": (2, 14, 3, ("5.33e-14", "5.33e-14", "5.33e-14", "5.33e-15", "5.33e-14", "4.85e-14")),
    "ex-2-2-15": (2, 19, 3, ("9.55e-14", "9.55e-14", "9.55e-14", "9.55e-14", "9.55e-14", "8.84e-14")),
    "ex-2-2-20": (2, 24, 3, ("1.49e-13", "1.49e-13", "1.49e-13", "TIMEOUT", "1.49e-13", "1.40e-13")),
    "ex-2-5-2": (2, 9, 6, ("1.67e-13", "1.67e-13", "1.67e-13", "1.67e-13", "1.67e-13", "1.41e-13")),
    "ex-2-10-2": (2, 14, 11, ("1.05e-11", "1.05e-11", "1.34e-11", "1.05e-11", "1.05e-11", "8.76e-12")),
    "ex-5-2-2": (5, 12, 3, ("8.55e-14", "8.55e-14", "8.55e-14", "8.55e-14", "8.55e-14", "7.72e-14")),
    "ex-10-2-2": (10, 22, 3, ("5.16e-13", "5.16e-13", "5.16e-13", "5.16e-13", "5.16e-13", "4.82e-13")),
    "floudas2-6": (10, 50, 3, ("-", "-", "4.34e-13", "5.15e-13", "5.87e-13", "7.88e-13")),
    "floudas3-3": (6, 25, 3, ("-", "-", "4.05e-13", "5.81e-13", "4.05e-13", "5.76e-13")),
    "floudas3-4": (3, 7, 3, ("-", "-", "2.67e-15", "2.78e-15", "2.56e-15", "2.23e-15")),
    "floudas4-6": (2, 4, 3, ("-", "-", "1.89e-15", "1.82e-15", "1.33e-15", "1.23e-15")),
    "floudas4-7": (2, 8, 3, ("-", "-", "2.07e-14", "1.06e-14", "1.31e-14", "1.80e-14")),
    "doppler1": (3, 11, 3, ("1.65e-13", "1.65e-13", "-", "7.65e-12", "4.92e-13", "1.59e-13")),
    "doppler2": (3, 11, 3, ("3.14e-13", "3.14e-13", "-", "1.57e-11", "1.29e-12", "2.90e-13")),
    "doppler3": (3, 11, 3, ("8.14e-14", "8.14e-14", "-", "8.55e-12", "2.03e-13", "8.22e-14")),
    "verhulst": (1, 5, 5, ("4.40e-16", "4.40e-16", "-", "4.67e-16", "6.82e-16", "3.53e-16")),
    "carbonGas": (1, 11, 4, ("1.42e-08", "1.42e-08", "-", "2.21e-08", "4.64e-08", "1.23e-08")),
    "predPrey": (1, 7, 10, ("2.32e-16", "2.32e-16", "-", "2.52e-16", "2.94e-16", "1.89e-16")),
    "turbine1": (3, 17, 4, ("7.75e-14", "7.75e-14", "-", "2.45e-11", "1.25e-13", "2.33e-14")),
    "turbine2": (3, 13, 2, ("1.16e-13", "1.16e-13", "-", "2.08e-12", "1.76e-13", "3.14e-14")),
    "turbine3": (3, 17, 4, ("5.36e-14", "5.36e-14", "-", "1.71e-11", "8.50e-14", "1.70e-14")),
    "jet": (2, 24, 8, ("2.73e-09", "2.73e-09", "-", "OoM", "1.62e-08", "1.50e-11")),
}

# (case, method) runs too heavy for a desk machine; run only when asked for
# by name or with include_skippable
SKIPPABLE: Dict[str, frozenset] = {
    "floudas2-6": frozenset({"ks"}),
    "ex-2-10-2": frozenset({"ks"}),     # order-11 LP: 173k columns, 3.4M nonzeros
}

_EX = re.compile(r"^ex-(\d+)-(\d+)-(\d+)$")


@dataclass(frozen=True)
class Reference:
    tool: str
    value: str
    provenance: str

    @property
    def number(self) -> Optional[float]:
        try:
            return float(self.value)
        except ValueError:
            return None


@dataclass
class BenchmarkCase:
    name: str
    source: str
    references: Dict[str, Reference] = field(default_factory=dict)
    bern: bool = True
    ks: bool = True
    table_n: Optional[int] = None
    table_m: Optional[int] = None
    table_d: Optional[int] = None
    heavy: frozenset = frozenset()

    @property
    def skippable(self) -> bool:
        return bool(self.heavy)

    def is_heavy(self, method: str) -> bool:
        return method in self.heavy

    def program(self) -> Program:
        return _parse_cached(self.source)

    def applies(self, method: str) -> bool:
        return self.bern if method == "bern" else self.ks

    def reference(self, method: str) -> Optional[float]:
        ref = self.references.get(METHOD_COLUMN[method])
        return ref.number if ref is not None else None


@lru_cache(maxsize=None)
def _parse_cached(source: str) -> Program:
    return parse_program(source)


def ex_label(n: int, nsum: int, deg: int) -> str:
    """Labels list n, then the product degree, then the number of summands."""
    return f"ex-{n}-{deg}-{nsum}"


def parse_ex_label(label: str) -> Tuple[int, int, int]:
    """'ex-2-2-5' -> (n, nSum, deg) = (2, 5, 2)."""
    m = _EX.match(label)
    if not m:
        raise ValueError(f"not an ex-family label: {label!r}")
    n, deg, nsum = (int(v) for v in m.groups())
    return n, nsum, deg


def ex_family_source(n: int, nsum: int, deg: int) -> str:
    if min(n, nsum, deg) < 1:
        raise ValueError("n, nSum and deg must be at least 1")
    names = [f"x{i + 1}" for i in range(n)]
    inner = names[0] if n == 1 else "(" + " + ".join(names) + ")"
    prod = "*".join([inner] * deg)
    body = " + ".join([prod] * (nsum + 1))
    decls = "; ".join(f"{v} in [-1, 1]" for v in names)
    return f"name: {ex_label(n, nsum, deg)}\nvars: {decls}\nexpr: {body}\n"


def generate_ex_family(n: int, nsum: int, deg: int) -> Program:
    """sum_{j=0}^{nSum} prod_{k=1}^{deg} (x_1 + ... + x_n) on [-1, 1]^n."""
    return parse_program(ex_family_source(n, nsum, deg))


def _program_text(name: str) -> str:
    return resources.files("fpcert.bench").joinpath("programs", f"{name}.fp").read_text()


def _case(name: str, source: str) -> BenchmarkCase:
    prog = parse_program(source)
    box_only = not prog.constraints
    refs, tn, tm, td = {}, None, None, None
    if name in REFERENCE_TABLE:
        tn, tm, td, values = REFERENCE_TABLE[name]
        refs = {tool: Reference(tool, v, f"reference table, {tool} column")
                for tool, v in zip(TOOLS, values)}
    return BenchmarkCase(name, source, refs, bern=box_only, ks=prog.is_polynomial(),
                         table_n=tn, table_m=tm, table_d=td, heavy=SKIPPABLE.get(name, frozenset()))


@lru_cache(maxsize=None)
def _corpus() -> Tuple[BenchmarkCase, ...]:
    cases = []
    for entry in resources.files("fpcert.bench").joinpath("programs").iterdir():
        if entry.name.endswith(".fp"):
            name = entry.name[:-3]
            cases.append(_case(name, entry.read_text()))
    for name in REFERENCE_TABLE:
        if name.startswith("ex-"):
            cases.append(_case(name, ex_family_source(*parse_ex_label(name))))
    return tuple(sorted(cases, key=lambda c: c.name))


def load_corpus() -> List[BenchmarkCase]:
    return list(_corpus())


def get_case(name: str) -> BenchmarkCase:
    for case in _corpus():
        if case.name == name:
            return case
    raise KeyError(f"no benchmark named {name!r}")
