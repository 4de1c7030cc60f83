"""Semantic overlap between a synthetic instruction corpus and a test set."""

import csv
import io
import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .._validation import check_threshold
from ..exceptions import ValidationError
from ..providers.mock import stable_seed
from ..similarity import cosine_matrix
from ..store import atomic_write_text, write_json

BIN_WIDTH = 0.05
DEFAULT_THRESHOLDS = (0.7,)
DEFAULT_RATIOS = (0.1, 0.2, 0.4)
TOP_PAIRS = 20


def corpus(items):
    """``(ids, texts)`` from strings, ``{"id", "text"}`` dicts or objects with ``id``/``text``."""
    ids, texts = [], []
    for i, item in enumerate(items):
        if isinstance(item, str):
            ids.append(str(i))
            texts.append(item)
        elif isinstance(item, dict):
            ids.append(str(item.get("id", i)))
            texts.append(item["text"])
        else:
            ids.append(str(getattr(item, "id", i)))
            texts.append(item.text)
    return ids, texts


def fraction_above(scores, threshold):
    scores = np.asarray(scores, dtype=float)
    return float(np.mean(scores > threshold)) if scores.size else 0.0


def histogram(scores, width=BIN_WIDTH):
    """Counts over [0, 1] in bins of ``width``; negative cosines land in the first bin."""
    n_bins = int(round(1 / width))
    idx = np.clip(np.floor(np.clip(scores, 0.0, 1.0) / width + 1e-9).astype(int), 0, n_bins - 1)
    return np.bincount(idx, minlength=n_bins).tolist()


@dataclass
class SimilarityReport:
    synthetic_ids: List[str]
    test_ids: List[str]
    matrix: np.ndarray = field(repr=False)
    pair_scores: List[Tuple[str, str, float]]
    histogram: List[int]
    fraction_above: Dict[float, float]
    top_pairs: List[Tuple[str, str, float]]

    @property
    def max_scores(self):
        return np.array([s for _, _, s in self.pair_scores])

    def to_json(self):
        return {
            "bin_width": BIN_WIDTH,
            "histogram": self.histogram,
            "fraction_above": {f"{t:g}": v for t, v in sorted(self.fraction_above.items())},
            "pair_scores": [list(p) for p in self.pair_scores],
            "top_pairs": [list(p) for p in self.top_pairs],
        }


def overlap_report(synthetic, test, embedder, thresholds=DEFAULT_THRESHOLDS, top=TOP_PAIRS):
    """Max cosine of every synthetic instruction against the test set.

    Ties for the closest test item go to the earlier one. ``top_pairs`` lists
    the ``top`` most similar (synthetic, test) pairs, best first.
    """
    syn_ids, syn_texts = corpus(synthetic)
    test_ids, test_texts = corpus(test)
    if not syn_texts or not test_texts:
        raise ValidationError("both corpora must be non-empty")
    thresholds = [check_threshold(t, "thresholds", low_open=False) for t in thresholds]
    S = embedder.embed_texts(syn_texts)
    T = embedder.embed_texts(test_texts)
    M = cosine_matrix(S, T)
    best = np.argmax(M, axis=1)
    pairs = [(syn_ids[i], test_ids[j], float(M[i, j])) for i, j in enumerate(best)]
    scores = np.array([p[2] for p in pairs])
    order = sorted(range(len(pairs)), key=lambda i: (-pairs[i][2], pairs[i][0]))
    return SimilarityReport(
        syn_ids, test_ids, M, pairs, histogram(scores),
        {t: fraction_above(scores, t) for t in thresholds},
        [pairs[i] for i in order[:top]],
    )


def removal_count(ratio, n):
    # guard against 0.1 * 30 = 3.0000000000000004 rounding up to 4
    return min(n, max(0, math.ceil(round(ratio * n, 9))))


def removal_subsets(synthetic, report, ratios=DEFAULT_RATIOS, seed=0):
    """Per ratio, the corpus with its most test-similar items removed and a random control.

    Both subsets drop ``ceil(ratio * n)`` items and keep the original order.
    Similarity ties are broken by id.
    """
    items = list(synthetic)
    ids, _ = corpus(items)
    if ids != report.synthetic_ids:
        raise ValidationError("report was computed for a different synthetic corpus")
    scores = report.max_scores
    ranked = sorted(range(len(items)), key=lambda i: (-scores[i], ids[i]))
    out = {}
    for r in ratios:
        if not 0 < r < 1:
            raise ValidationError(f"ratio must lie in (0, 1), got {r}", field="ratios")
        m = removal_count(r, len(items))
        top = set(ranked[:m])
        rnd = set(random.Random(stable_seed(seed, f"{r:g}")).sample(range(len(items)), m))
        out[r] = {
            "most_similar_removed": [it for i, it in enumerate(items) if i not in top],
            "random_removed": [it for i, it in enumerate(items) if i not in rnd],
        }
    return out


class OverlapAnalyzer(BaseEstimator):
    """``fit(synthetic, test)`` computes ``report_``; ``transform`` returns max scores."""

    def __init__(self, embedder=None, thresholds=DEFAULT_THRESHOLDS):
        self.embedder = embedder
        self.thresholds = thresholds

    def fit(self, X, y):
        if self.embedder is None:
            raise ValidationError("embedder must be set before fit", field="embedder")
        self.report_ = overlap_report(X, y, self.embedder, self.thresholds)
        return self

    def transform(self, X=None):
        check_is_fitted(self, "report_")
        return self.report_.max_scores


def write_overlap(report, directory, subsets=None):
    """``overlap.json``, ``overlap_pairs.csv``, ``overlap_histogram.csv`` and optional subsets."""
    directory = Path(directory)
    payload = report.to_json()
    if subsets is not None:
        payload["removal_subsets"] = {
            f"{r:g}": {k: corpus(v)[0] for k, v in parts.items()} for r, parts in subsets.items()
        }
    write_json(directory / "overlap.json", payload)
    _write_csv(directory / "overlap_pairs.csv", ("synthetic_id", "test_id", "cosine"),
               [(a, b, f"{s:.6f}") for a, b, s in report.pair_scores])
    _write_csv(directory / "overlap_histogram.csv", ("bin_low", "bin_high", "count"),
               [(f"{i * BIN_WIDTH:.2f}", f"{(i + 1) * BIN_WIDTH:.2f}", c)
                for i, c in enumerate(report.histogram)])
    return directory


def _write_csv(path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return atomic_write_text(path, buf.getvalue())


def load_corpus(path):
    """Instruction corpus from a JSONL file (``id``/``text`` rows) or a plain text file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix in (".jsonl", ".json"):
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    return [line.strip() for line in text.splitlines() if line.strip()]
