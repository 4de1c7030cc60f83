"""Per-app semantic index over functionality embeddings.

On-disk matrix format (``index.bin``): a 16-byte little-endian header
``b"AFIX"``, version (u32), row count (u32), dimension (u32), followed by the
row-major float32 matrix.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_embeddings, check_int, check_threshold
from ..exceptions import ValidationError
from ..similarity import cosine_matrix, greedy_diverse

MAGIC = b"AFIX"
VERSION = 1
DEFAULT_DIVERSITY = 0.8
DEFAULT_K = 30


def to_f32(X):
    """Round to float32 precision (the persisted precision), returned as float64."""
    return np.asarray(X, dtype=np.float32).astype(np.float64)


def write_matrix(path, X):
    X = np.ascontiguousarray(X, dtype="<f4")
    count, dim = X.shape if X.size else (0, X.shape[1] if X.ndim == 2 else 0)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(MAGIC + struct.pack("<III", VERSION, count, dim) + X.tobytes())
    return path


def read_matrix(path):
    blob = Path(path).read_bytes()
    if blob[:4] != MAGIC:
        raise ValidationError(f"{path} is not an AFIX matrix")
    version, count, dim = struct.unpack("<III", blob[4:16])
    if version != VERSION:
        raise ValidationError(f"unsupported AFIX version {version}")
    data = np.frombuffer(blob[16 : 16 + 4 * count * dim], dtype="<f4")
    return data.reshape(count, dim).astype(np.float64)


@dataclass
class RetrievalIndex:
    ids: np.ndarray          # functionality ids, admission order
    screen_ids: np.ndarray   # screen of each entry
    vectors: np.ndarray      # (n, dim)

    @property
    def dim(self):
        return self.vectors.shape[1] if self.vectors.ndim == 2 else 0

    def __len__(self):
        return len(self.ids)


def diversity_filter(X, threshold=DEFAULT_DIVERSITY):
    """Indices admitted by a greedy in-order scan keeping pairwise cosine < threshold."""
    threshold = check_threshold(threshold, "diversity_threshold")
    return greedy_diverse(check_embeddings(X), threshold)


class DiversityFilter(TransformerMixin, BaseEstimator):
    """Row selector: keeps rows whose cosine to every earlier kept row is below ``threshold``."""

    def __init__(self, threshold=DEFAULT_DIVERSITY):
        self.threshold = threshold

    def fit(self, X, y=None):
        self.support_ = np.array(diversity_filter(X, self.threshold), dtype=int)
        return self

    def get_support(self, indices=True):
        check_is_fitted(self, "support_")
        return self.support_

    def transform(self, X):
        check_is_fitted(self, "support_")
        return np.asarray(X)[self.support_]


def build_index(functionalities, embedder, diversity_threshold=DEFAULT_DIVERSITY):
    """Embed every functionality and index a diverse subset of them.

    All descriptions are embedded in one batch and the vectors are stored on
    the functionalities. Entries are admitted greedily in (screen id,
    functionality id) order, skipping any whose cosine with an admitted entry
    reaches ``diversity_threshold``.
    """
    functionalities = sorted(functionalities, key=lambda f: (f.screen_id, f.id))
    if not functionalities:
        return RetrievalIndex(np.zeros(0, int), np.zeros(0, int), np.zeros((0, getattr(embedder, "dim", 0) or 0)))
    vectors = to_f32(embedder.embed_texts([f.description for f in functionalities]))
    for f, v in zip(functionalities, vectors):
        f.embedding = v
        f.indexed = False
    admitted = diversity_filter(vectors, diversity_threshold)
    for i in admitted:
        functionalities[i].indexed = True
    return RetrievalIndex(
        np.array([functionalities[i].id for i in admitted], dtype=int),
        np.array([functionalities[i].screen_id for i in admitted], dtype=int),
        vectors[admitted],
    )


def retrieve_related(index, query, k=DEFAULT_K, exclude=(), diversity_threshold=DEFAULT_DIVERSITY):
    """Functionality ids of the top-``k`` entries by cosine to ``query``.

    Entries on screens in ``exclude`` are skipped, and results are kept
    pairwise below ``diversity_threshold``. Ranking ties go to the lower
    functionality id. Fewer than ``k`` ids come back when the pool runs out.
    """
    k = check_int(k, "k", minimum=0)
    if k == 0 or len(index) == 0:
        return []
    threshold = check_threshold(diversity_threshold, "diversity_threshold")
    sims = cosine_matrix(index.vectors, np.asarray(query, dtype=np.float64)[None, :])[:, 0]
    order = sorted(range(len(index)), key=lambda i: (-sims[i], index.ids[i]))
    exclude = set(exclude)
    eligible = np.array([s not in exclude for s in index.screen_ids], dtype=bool)
    picked = greedy_diverse(index.vectors, threshold, order=order, limit=k, candidates=eligible)
    return [int(index.ids[i]) for i in picked]
