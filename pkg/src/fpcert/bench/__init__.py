"""Benchmark corpus and regression harness."""

from .corpus import (REFERENCE_TABLE, SKIPPABLE, BenchmarkCase, Reference, ex_label, generate_ex_family,
                     get_case, load_corpus, parse_ex_label)
from .harness import CorpusReport, run_benchmarks, run_case, select_runs

__all__ = ["REFERENCE_TABLE", "SKIPPABLE", "BenchmarkCase", "Reference", "ex_label", "generate_ex_family",
           "get_case", "load_corpus", "parse_ex_label", "CorpusReport", "run_benchmarks", "run_case",
           "select_runs"]
