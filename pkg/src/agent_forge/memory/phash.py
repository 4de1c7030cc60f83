"""64-bit difference hash (dHash) of grayscale renders."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .._validation import check_grid

HASH_COLS = 9
HASH_ROWS = 8
HASH_BITS = 64


def _edges(n, parts):
    return [(i * n) // parts for i in range(parts + 1)]


def downsample(grid, rows=HASH_ROWS, cols=HASH_COLS):
    """Box-average ``grid`` onto a ``rows x cols`` lattice.

    Cell (r, c) averages pixel rows ``[r*H//rows, (r+1)*H//rows)`` and columns
    ``[c*W//cols, (c+1)*W//cols)``. Grids smaller than the lattice are first
    enlarged by pixel repetition so that no cell is empty.
    """
    grid = np.asarray(check_grid(grid), dtype=np.float64)
    h, w = grid.shape
    if h < rows or w < cols:
        grid = np.repeat(np.repeat(grid, -(-rows // h), axis=0), -(-cols // w), axis=1)
        h, w = grid.shape
    re, ce = _edges(h, rows), _edges(w, cols)
    out = np.empty((rows, cols))
    for r in range(rows):
        band = grid[re[r] : re[r + 1]]
        for c in range(cols):
            out[r, c] = band[:, ce[c] : ce[c + 1]].mean()
    return out


def phash(grid):
    """Difference hash: bit ``r*8 + c`` (MSB first) is set iff cell(r, c) > cell(r, c+1)."""
    cells = downsample(grid)
    bits = (cells[:, :-1] > cells[:, 1:]).ravel()
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


def hamming(a, b):
    return bin((int(a) ^ int(b)) & ((1 << HASH_BITS) - 1)).count("1")


def phash_similarity(a, b):
    return 1.0 - hamming(a, b) / HASH_BITS


class DHashTransformer(TransformerMixin, BaseEstimator):
    """Stateless transformer mapping a sequence of grids to their 64-bit hashes."""

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return np.array([phash(g) for g in X], dtype=np.uint64)
