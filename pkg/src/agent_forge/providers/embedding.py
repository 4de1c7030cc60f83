"""Embedding backends: the deterministic feature-hashing embedder and helpers."""

import re

import numpy as np

from ..exceptions import InvariantViolation, ValidationError

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1
_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")

MAX_TEXT_CHARS = 8192


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h


def tokenize(text: str) -> list:
    """Lowercase and split on runs of non-alphanumeric (ASCII) characters."""
    return [tok for tok in _TOKEN_SPLIT.split(text.lower()) if tok]


def check_texts(texts):
    texts = list(texts)
    if not texts:
        raise ValidationError("texts must be non-empty", field="texts")
    for i, text in enumerate(texts):
        if not isinstance(text, str):
            raise ValidationError(f"expected str, got {type(text).__name__}", field=f"texts[{i}]")
        if len(text) > MAX_TEXT_CHARS:
            raise ValidationError(
                f"text longer than {MAX_TEXT_CHARS} characters", field=f"texts[{i}]"
            )
    return texts


def normalize_rows(X):
    X = np.asarray(X, dtype=np.float64)
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise InvariantViolation("cannot normalise a zero embedding")
    return X / norms


class HashingEmbedder:
    """Offline embedder: signed FNV-1a feature hashing of the token multiset.

    Each token is hashed with 64-bit FNV-1a; ``h % dim`` picks the bucket and
    the top bit of ``h`` picks the sign. The count vector is L2-normalised. A
    text with no tokens maps to the first basis vector. The result depends
    only on the multiset of tokens, so word order, case and punctuation are
    irrelevant.
    """

    def __init__(self, dim=256):
        if dim < 1:
            raise ValidationError("dim must be >= 1", field="dim")
        self.dim = dim

    def _embed_one(self, text):
        vec = np.zeros(self.dim, dtype=np.float64)
        tokens = tokenize(text)
        if not tokens:
            vec[0] = 1.0
            return vec
        for tok in tokens:
            h = fnv1a_64(tok.encode("utf-8"))
            sign = -1.0 if h >> 63 else 1.0
            vec[h % self.dim] += sign
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            # every token cancelled out against another with opposite sign
            vec[:] = 0.0
            vec[0] = 1.0
            return vec
        return vec / norm

    def embed_texts(self, texts):
        texts = check_texts(texts)
        return np.vstack([self._embed_one(t) for t in texts])

    def __repr__(self):
        return f"HashingEmbedder(dim={self.dim})"


def embed_one(embedder, text):
    return embedder.embed_texts([text])[0]
