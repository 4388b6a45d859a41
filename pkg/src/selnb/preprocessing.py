"""Turning real-valued expression data into binary datasets."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .counts import BinaryDataset

# Values equal to the median map to 0.
MEDIAN_TIE_RULE = "x > median -> 1, x <= median -> 0"


class MedianBinarizer(TransformerMixin, BaseEstimator):
    """Threshold each column at its training median (strictly above -> 1).

    Attributes
    ----------
    medians_ : ndarray of shape (n_features,)
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.medians_ = np.median(X, axis=0)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "medians_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return (X > self.medians_).astype(np.int8)


def binarize_by_median(values, labels, feature_ids=None) -> BinaryDataset:
    """Binarize a real-valued dataset with medians computed on all its cases."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[0] < 1:
        raise ValueError("need a 2-d matrix with at least one case")
    if not np.all(np.isfinite(values)):
        raise ValueError("values must be finite")
    bits = MedianBinarizer().fit_transform(values)
    return BinaryDataset(bits, labels, feature_ids)


def partition_features(dataset: BinaryDataset, groups: int, seed=None) -> list:
    """Split the columns into ``groups`` random disjoint equal-sized datasets."""
    if int(groups) != groups or groups < 1:
        raise ValueError("groups must be a positive integer")
    if dataset.p % groups:
        raise ValueError(f"{dataset.p} features cannot be split into {groups} equal groups")
    if groups == 1:
        return [dataset]
    perm = np.random.default_rng(seed).permutation(dataset.p)
    return [dataset.subset_features(np.sort(chunk)) for chunk in np.split(perm, groups)]
