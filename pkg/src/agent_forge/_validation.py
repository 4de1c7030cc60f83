"""Small input-validation helpers used by the estimators and config loader."""

import numbers

import numpy as np

from .exceptions import ValidationError


def check_threshold(value, name, *, low_open=True):
    """Validate a similarity threshold in (0, 1] (or [0, 1] with ``low_open=False``)."""
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ValidationError(f"expected a real number, got {value!r}", field=name)
    value = float(value)
    lower_ok = value > 0.0 if low_open else value >= 0.0
    if not (lower_ok and value <= 1.0):
        interval = "(0, 1]" if low_open else "[0, 1]"
        raise ValidationError(f"must lie in {interval}, got {value}", field=name)
    return value


def check_probability(value, name):
    return check_threshold(value, name, low_open=False)


def check_int(value, name, minimum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValidationError(f"expected an integer, got {value!r}", field=name)
    value = int(value)
    if minimum is not None and value < minimum:
        raise ValidationError(f"must be >= {minimum}, got {value}", field=name)
    return value


def check_embeddings(X, name="X"):
    """Return ``X`` as a 2-D float64 array of unit rows.

    Rows must already be L2-normalised; a row further than 1e-6 from unit
    norm is rejected rather than silently renormalised.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1) if X.size else X.reshape(0, 0)
    if X.ndim != 2:
        raise ValidationError(f"expected a 2-D array, got shape {X.shape}", field=name)
    if X.shape[0] and not np.all(np.isfinite(X)):
        raise ValidationError("contains NaN or inf", field=name)
    if X.shape[0]:
        norms = np.linalg.norm(X, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-6):
            raise ValidationError("rows must be unit-norm", field=name)
    return X


def check_grid(grid, name="grid"):
    grid = np.asarray(grid)
    if grid.ndim != 2 or grid.size == 0:
        raise ValidationError(
            f"expected a non-empty 2-D pixel grid, got shape {grid.shape}", field=name
        )
    return grid
