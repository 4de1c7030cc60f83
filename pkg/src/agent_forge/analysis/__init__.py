"""Overlap and functionality-coverage analyses of synthetic corpora."""

from .coverage import (
    AtomicFunctionality,
    CoverageAnalyzer,
    CoverageResult,
    coverage,
    coverage_curve,
    decompose_task,
    write_coverage,
)
from .overlap import (
    OverlapAnalyzer,
    SimilarityReport,
    fraction_above,
    histogram,
    load_corpus,
    overlap_report,
    removal_count,
    removal_subsets,
    write_overlap,
)

__all__ = [
    "AtomicFunctionality", "CoverageAnalyzer", "CoverageResult", "OverlapAnalyzer",
    "SimilarityReport", "coverage", "coverage_curve", "decompose_task", "fraction_above",
    "histogram", "load_corpus", "overlap_report", "removal_count", "removal_subsets",
    "write_coverage", "write_overlap",
]
