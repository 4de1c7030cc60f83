"""Coverage of test-required atomic functionalities by a synthetic corpus."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .. import prompts
from .._validation import check_threshold
from ..exceptions import ProviderError, ValidationError
from ..providers.chat import GenerationRequest, TextPart, parse_json_list
from ..similarity import cosine_matrix
from ..store import write_json
from .overlap import _write_csv

logger = logging.getLogger(__name__)

DEFAULT_MATCH = 0.8
COVERAGE_BINS = 5  # grid columns: [0, .2), [.2, .4), ..., [.8, 1]


@dataclass
class AtomicFunctionality:
    text: str
    embedding: Optional[Any] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.text, str) or not self.text.strip():
            raise ValidationError("functionality text must be non-empty", field="text")


def decompose_request(text):
    return GenerationRequest(prompts.DECOMPOSE_SYSTEM, (TextPart(f"Task: {text}"),), 0.0, None,
                             {"task": "decompose", "text": text})


def decompose_task(text, decomposer, embedder=None):
    """Ask ``decomposer`` for the atomic functionalities ``text`` needs.

    An unusable reply gives an empty list (logged); callers treat an empty
    decomposition as flagged.
    """
    if not isinstance(text, str) or not text.strip():
        raise ValidationError("task text must be non-empty", field="text")
    try:
        phrases = parse_json_list(decomposer.chat_generate(decompose_request(text)))
    except ProviderError as exc:
        logger.warning("decomposer failed on %r: %s", text[:60], exc)
        phrases = None
    if not phrases:
        logger.warning("no functionalities decomposed from %r", text[:60])
        return []
    out = [AtomicFunctionality(p.strip()) for p in phrases if isinstance(p, str) and p.strip()]
    if embedder is not None and out:
        for f, v in zip(out, embedder.embed_texts([f.text for f in out])):
            f.embedding = v
    return out


def _matrix(items, dim=None):
    rows = [f.embedding if isinstance(f, AtomicFunctionality) else f for f in items]
    if not rows:
        return np.zeros((0, dim or 0))
    return np.asarray(rows, dtype=np.float64)


@dataclass
class CoverageResult:
    per_task: List[Optional[float]]  # None for skipped (flagged) tasks
    aggregate: float
    flagged: List[int]
    complexity: List[int]
    grid: List[List[int]]  # rows: complexity 1..max, cols: coverage bins

    def to_json(self):
        return {"per_task": self.per_task, "aggregate": self.aggregate, "flagged": self.flagged,
                "complexity": self.complexity, "grid": self.grid,
                "grid_columns": [f"{i / COVERAGE_BINS:.1f}" for i in range(COVERAGE_BINS)]}


def coverage(required, synthesized, match_threshold=DEFAULT_MATCH):
    """Fraction of each task's required functionalities matched by the synthetic pool.

    A requirement is covered when some pool entry has cosine >= ``match_threshold``
    with it. Tasks with no requirements are skipped and flagged. The grid
    counts tasks by (number of requirements, coverage bin).
    """
    match_threshold = check_threshold(match_threshold, "match_threshold")
    pool = _matrix(synthesized)
    per_task, flagged, complexity = [], [], []
    for i, req in enumerate(required):
        R = _matrix(req)
        if len(R) == 0:
            per_task.append(None)
            flagged.append(i)
            complexity.append(0)
            continue
        if len(pool) == 0:
            covered = np.zeros(len(R), dtype=bool)
        else:
            covered = (cosine_matrix(R, pool) >= match_threshold).any(axis=1)
        per_task.append(float(covered.mean()))
        complexity.append(len(R))
    scored = [c for c in per_task if c is not None]
    aggregate = float(np.mean(scored)) if scored else 0.0
    max_c = max(complexity, default=0)
    grid = [[0] * COVERAGE_BINS for _ in range(max_c)]
    for c, k in zip(per_task, complexity):
        if c is not None:
            grid[k - 1][min(int(c * COVERAGE_BINS + 1e-9), COVERAGE_BINS - 1)] += 1
    return CoverageResult(per_task, aggregate, flagged, complexity, grid)


def coverage_curve(instructions, sizes, required, decomposer, embedder, match_threshold=DEFAULT_MATCH):
    """Aggregate coverage of growing instruction prefixes.

    Each instruction is decomposed once; the pool for size ``k`` is the union
    of the first ``k`` decompositions, so the curve never decreases.
    """
    sizes = list(sizes)
    if any(b <= a for a, b in zip(sizes, sizes[1:])) or (sizes and sizes[0] < 0):
        raise ValidationError("sizes must be non-negative and strictly increasing", field="sizes")
    texts = [t if isinstance(t, str) else t.text for t in instructions]
    needed = min(max(sizes, default=0), len(texts))
    pieces = [decompose_task(t, decomposer, embedder) for t in texts[:needed]]
    curve = []
    for k in sizes:
        pool = [f for p in pieces[:k] for f in p]
        curve.append((k, coverage(required, pool, match_threshold).aggregate))
    return curve


class CoverageAnalyzer(BaseEstimator):
    """``fit(test_tasks)`` decomposes the test set; ``score(instructions)`` gives aggregate coverage."""

    def __init__(self, decomposer=None, embedder=None, match_threshold=DEFAULT_MATCH):
        self.decomposer = decomposer
        self.embedder = embedder
        self.match_threshold = match_threshold

    def fit(self, X, y=None):
        if self.decomposer is None or self.embedder is None:
            raise ValidationError("decomposer and embedder must be set before fit")
        texts = [t if isinstance(t, str) else t.text for t in X]
        self.required_ = [decompose_task(t, self.decomposer, self.embedder) for t in texts]
        return self

    def transform(self, X):
        """Coverage result of the synthetic instructions ``X``."""
        check_is_fitted(self, "required_")
        texts = [t if isinstance(t, str) else t.text for t in X]
        pool = [f for t in texts for f in decompose_task(t, self.decomposer, self.embedder)]
        return coverage(self.required_, pool, self.match_threshold)

    def score(self, X, y=None):
        return self.transform(X).aggregate


def write_coverage(result, directory, curve=None):
    """``coverage.json`` plus ``coverage_grid.csv`` (and ``coverage_curve.csv`` if given)."""
    directory = Path(directory)
    payload = result.to_json()
    if curve is not None:
        payload["curve"] = [[k, v] for k, v in curve]
        _write_csv(directory / "coverage_curve.csv", ("size", "coverage"),
                   [(k, f"{v:.6f}") for k, v in curve])
    write_json(directory / "coverage.json", payload)
    header = ("complexity",) + tuple(f"cov_{i / COVERAGE_BINS:.1f}" for i in range(COVERAGE_BINS))
    _write_csv(directory / "coverage_grid.csv", header,
               [(k + 1, *row) for k, row in enumerate(result.grid)])
    return directory
