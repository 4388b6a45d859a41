"""Screening features by absolute sample correlation with the labels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_binary_labels, check_binary_matrix
from .counts import BinaryDataset
from .numerics import exceeds, feature_correlations


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of a screening step.

    ``columns`` are positions in the original matrix, ordered by decreasing
    ``|COR|`` then by position; ``feature_ids`` follow the same order.
    Every omitted feature is known to have ``|COR| <= gamma``.
    """

    columns: np.ndarray
    feature_ids: tuple
    p: int
    gamma: float
    correlations: np.ndarray

    @property
    def k(self) -> int:
        return len(self.columns)

    @property
    def omitted_count(self) -> int:
        return self.p - self.k


def _ordered(columns, abs_cor):
    columns = np.asarray(columns, dtype=int)
    order = np.lexsort((columns, -abs_cor[columns]))
    return columns[order]


def _result(dataset, columns, gamma, cor):
    columns = _ordered(columns, np.abs(cor))
    return SelectionResult(
        columns=columns,
        feature_ids=tuple(dataset.feature_ids[c] for c in columns),
        p=dataset.p,
        gamma=float(gamma),
        correlations=np.abs(cor[columns]),
    )


def select_by_threshold(dataset: BinaryDataset, gamma: float) -> SelectionResult:
    """Keep exactly the features with ``|COR| > gamma``.

    A threshold of 1 or more keeps nothing.
    """
    if not np.isfinite(gamma) or gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    cor = feature_correlations(dataset.features, dataset.labels)
    keep = np.flatnonzero(exceeds(np.abs(cor), gamma))
    return _result(dataset, keep, gamma, cor)


def select_top_k(dataset: BinaryDataset, k: int, rng_seed=None) -> SelectionResult:
    """Keep the ``k`` features of largest ``|COR|``, breaking ties at random.

    The threshold is the ``|COR|`` of the weakest retained feature. Constant
    columns rank below every non-constant column.
    """
    p = dataset.p
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k}")
    if k > p:
        raise ValueError(f"cannot select {k} of {p} features")
    cor = feature_correlations(dataset.features, dataset.labels)
    abs_cor = np.abs(cor)
    ones = dataset.features.sum(axis=0)
    constant = (ones == 0) | (ones == dataset.n)
    rng = np.random.default_rng(rng_seed)
    tiebreak = rng.permutation(p)
    # equal lattice correlations can differ in the last bits
    key = np.round(abs_cor, 12)
    ranking = np.lexsort((tiebreak, constant, -key))
    keep = ranking[:k]
    gamma = abs_cor[keep].min()
    return _result(dataset, keep, gamma, cor)


class CorrelationSelector(SelectorMixin, BaseEstimator):
    """Transformer wrapper around :func:`select_top_k` / :func:`select_by_threshold`.

    Exactly one of ``n_features_to_select`` and ``threshold`` must be set.

    Attributes
    ----------
    selection_ : SelectionResult
    gamma_ : float
    """

    def __init__(self, n_features_to_select=None, threshold=None, random_state=None):
        self.n_features_to_select = n_features_to_select
        self.threshold = threshold
        self.random_state = random_state

    def fit(self, X, y):
        dataset = BinaryDataset(check_binary_matrix(X), check_binary_labels(y))
        self.n_features_in_ = dataset.p
        self.selection_ = select_features(dataset, self.n_features_to_select,
                                          self.threshold, self.random_state)
        self.gamma_ = self.selection_.gamma
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "selection_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.selection_.columns] = True
        return mask


def select_features(dataset, n_features_to_select=None, threshold=None, random_state=None):
    if (n_features_to_select is None) == (threshold is None):
        raise ValueError("set exactly one of n_features_to_select and threshold")
    if threshold is not None:
        return select_by_threshold(dataset, threshold)
    return select_top_k(dataset, n_features_to_select, random_state)
