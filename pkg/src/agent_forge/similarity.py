"""Cosine similarity on unit vectors, plus the greedy diversity scan.

Scores are rounded to 12 decimals so that two vectors whose cosines agree
mathematically also compare equal in floating point regardless of the BLAS
summation order; every threshold and ranking decision in the package goes
through these helpers.
"""

import numpy as np

DECIMALS = 12


def cosine_matrix(A, B):
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.size == 0 or B.size == 0:
        return np.zeros((len(A), len(B)))
    return np.round(A @ B.T, DECIMALS)


def cosine(a, b):
    return float(np.round(np.dot(np.asarray(a, float), np.asarray(b, float)), DECIMALS))


def greedy_diverse(X, threshold, order=None, limit=None, candidates=None):
    """Greedily admit rows of ``X`` whose cosine to every admitted row is < ``threshold``.

    Rows are visited in ``order`` (default: index order). ``candidates`` is an
    optional boolean mask of rows eligible at all. Returns admitted indices in
    admission order, stopping once ``limit`` rows are admitted.
    """
    X = np.asarray(X, dtype=np.float64)
    n = len(X)
    if order is None:
        order = range(n)
    admitted = []
    if limit is not None and limit <= 0:
        return admitted
    for i in order:
        if candidates is not None and not candidates[i]:
            continue
        if admitted:
            sims = cosine_matrix(X[admitted], X[i : i + 1])[:, 0]
            if np.any(sims >= threshold):
                continue
        admitted.append(int(i))
        if limit is not None and len(admitted) >= limit:
            break
    return admitted
