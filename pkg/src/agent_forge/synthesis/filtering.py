"""Three-stage quality filter: score thresholds, semantic dedup, per-app cap."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .. import prompts
from .._validation import check_int, check_threshold
from ..exceptions import ProviderError, ValidationError
from ..providers.chat import GenerationRequest, TextPart, parse_json_object
from ..similarity import greedy_diverse

logger = logging.getLogger(__name__)

SCORE_FIELDS = ("complexity", "clarity", "reasonableness")
DEFAULT_CLARITY_MIN = 4
DEFAULT_REASON_MIN = 4
DEFAULT_DEDUP = 0.8
DEFAULT_PER_APP_CAP = 140


@dataclass(frozen=True)
class QualityScores:
    complexity: int
    clarity: int
    reasonableness: int

    def __post_init__(self):
        for name in SCORE_FIELDS:
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or not 1 <= v <= 5:
                raise ValidationError(f"score must be an integer in [1, 5], got {v!r}", field=name)

    def to_json(self):
        return {k: getattr(self, k) for k in SCORE_FIELDS}

    @classmethod
    def from_json(cls, d):
        return cls(*(d[k] for k in SCORE_FIELDS))


@dataclass
class TaskInstruction:
    id: str
    app: str
    text: str
    reasoning: str
    source_screen: int
    scores: QualityScores
    embedding: Optional[Any] = field(default=None, repr=False, compare=False)

    def to_json(self, embedding_ref=None):
        return {"id": self.id, "app": self.app, "text": self.text, "reasoning": self.reasoning,
                "source_screen": self.source_screen, "scores": self.scores.to_json(),
                "embedding_ref": embedding_ref}

    @classmethod
    def from_json(cls, d, embedding=None):
        return cls(d["id"], d["app"], d["text"], d["reasoning"], d["source_screen"],
                   QualityScores.from_json(d["scores"]), embedding)


def score_request(text):
    return GenerationRequest(prompts.SCORE_SYSTEM, (TextPart(f"Instruction: {text}"),), 0.0, None,
                             {"task": "score", "text": text})


def parse_scores(raw):
    obj = parse_json_object(raw)
    if obj is None:
        return None
    try:
        return QualityScores(*(obj.get(k) for k in SCORE_FIELDS))
    except ValidationError:
        return None


def score_candidate(candidate, scorer, attempts=2):
    """Scores for one candidate, or None after ``attempts`` unusable responses."""
    for _ in range(attempts):
        try:
            scores = parse_scores(scorer.chat_generate(score_request(candidate.text)))
        except ProviderError as exc:
            logger.warning("scorer failed: %s", exc)
            scores = None
        if scores is not None:
            return scores
    logger.warning("dropping unscorable candidate %r", candidate.text[:60])
    return None


def rank_key(c):
    s = c.scores
    return (-s.complexity, -s.clarity, -s.reasonableness, c.text)


def filter_instructions(candidates, embedder, scorer, clarity_min=DEFAULT_CLARITY_MIN,
                        reason_min=DEFAULT_REASON_MIN, dedup_threshold=DEFAULT_DEDUP,
                        per_app_cap=DEFAULT_PER_APP_CAP, jobs=1):
    """Score, deduplicate and cap candidate instructions.

    1. Every candidate is scored; those below ``clarity_min`` or
       ``reason_min`` are dropped (unscorable ones too).
    2. Survivors are ranked best first and admitted greedily while their
       cosine to every admitted instruction stays below ``dedup_threshold``.
    3. Each app keeps at most ``per_app_cap`` instructions, in rank order.

    Returns TaskInstructions with ids ``{app}-{n:04d}``, apps in sorted order.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValidationError("no candidates to filter", field="candidates")
    dedup_threshold = check_threshold(dedup_threshold, "dedup_threshold")
    clarity_min = check_int(clarity_min, "clarity_min", 1)
    reason_min = check_int(reason_min, "reason_min", 1)
    per_app_cap = check_int(per_app_cap, "per_app_cap", 0)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            scores = list(pool.map(lambda c: score_candidate(c, scorer), candidates))
    else:
        scores = [score_candidate(c, scorer) for c in candidates]
    survivors = []
    for c, s in zip(candidates, scores):
        c.scores = s
        if s is not None and s.clarity >= clarity_min and s.reasonableness >= reason_min:
            survivors.append(c)
    if not survivors:
        return []

    survivors.sort(key=rank_key)
    vectors = np.asarray(embedder.embed_texts([c.text for c in survivors]), dtype=np.float64)
    for c, v in zip(survivors, vectors):
        c.embedding = v
    admitted = [survivors[i] for i in greedy_diverse(vectors, dedup_threshold)]

    per_app = {}
    for c in admitted:
        bucket = per_app.setdefault(c.app_name, [])
        if len(bucket) < per_app_cap:
            bucket.append(c)
    out = []
    for app in sorted(per_app):
        for n, c in enumerate(per_app[app]):
            out.append(TaskInstruction(f"{app}-{n:04d}", app, c.text, c.reasoning, c.source_screen,
                                       c.scores, c.embedding))
    return out


class InstructionFilter(BaseEstimator):
    """Estimator form of :func:`filter_instructions`; ``fit`` stores ``instructions_``."""

    def __init__(self, embedder=None, scorer=None, clarity_min=DEFAULT_CLARITY_MIN,
                 reason_min=DEFAULT_REASON_MIN, dedup_threshold=DEFAULT_DEDUP,
                 per_app_cap=DEFAULT_PER_APP_CAP, jobs=1):
        self.embedder = embedder
        self.scorer = scorer
        self.clarity_min = clarity_min
        self.reason_min = reason_min
        self.dedup_threshold = dedup_threshold
        self.per_app_cap = per_app_cap
        self.jobs = jobs

    def fit(self, X, y=None):
        if self.embedder is None or self.scorer is None:
            raise ValidationError("embedder and scorer must be set before fit")
        self.instructions_ = filter_instructions(
            X, self.embedder, self.scorer, self.clarity_min, self.reason_min,
            self.dedup_threshold, self.per_app_cap, self.jobs)
        return self

    def transform(self, X=None):
        check_is_fitted(self, "instructions_")
        return list(self.instructions_)

    def fit_transform(self, X, y=None):
        return self.fit(X).transform()
