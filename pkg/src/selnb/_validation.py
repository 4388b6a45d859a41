"""Input validation helpers shared by the estimators and the harness."""

import numpy as np


def check_binary_matrix(X, name="X"):
    """Return ``X`` as a 2-d int8 array, raising if any entry is not 0/1."""
    X = np.asarray(X)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {X.shape}")
    if X.size and not np.isin(X, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0 and 1")
    return np.array(X, dtype=np.int8)


def check_binary_labels(y, name="y"):
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {y.shape}")
    if y.size and not np.isin(y, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0 and 1")
    return np.array(y, dtype=np.int8)


def check_probabilities(p, name="predictions"):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-d sequence")
    if not np.all((p >= 0) & (p <= 1)):
        raise ValueError(f"{name} must lie in [0, 1]")
    return p


def check_same_length(a, b):
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
