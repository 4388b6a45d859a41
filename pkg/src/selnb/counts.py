"""Binary datasets and the sufficient statistics the integrated model needs."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_binary_labels, check_binary_matrix


@dataclass(frozen=True)
class BinaryDataset:
    """An ``n x p`` bit matrix with labels and stable column identifiers."""

    features: np.ndarray
    labels: np.ndarray
    feature_ids: tuple = field(default=None)

    def __post_init__(self):
        X = check_binary_matrix(self.features)
        y = check_binary_labels(self.labels)
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"{X.shape[0]} feature rows but {y.shape[0]} labels")
        ids = self.feature_ids
        if ids is None:
            ids = tuple(str(j) for j in range(X.shape[1]))
        ids = tuple(ids)
        if len(ids) != X.shape[1]:
            raise ValueError(f"{len(ids)} feature ids for {X.shape[1]} columns")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "feature_ids", ids)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def subset_features(self, columns) -> "BinaryDataset":
        columns = np.asarray(columns, dtype=int)
        return BinaryDataset(self.features[:, columns], self.labels,
                             tuple(self.feature_ids[c] for c in columns))

    def subset_cases(self, rows) -> "BinaryDataset":
        rows = np.asarray(rows)
        return BinaryDataset(self.features[rows], self.labels[rows], self.feature_ids)


@dataclass(frozen=True)
class CountsSummary:
    """Class sizes and within-class one/zero counts per feature.

    ``ones[y, j]`` and ``zeros[y, j]`` are the numbers of class-``y`` cases
    with ``x_j = 1`` and ``x_j = 0``.
    """

    n: int
    N0: int
    N1: int
    ones: np.ndarray
    zeros: np.ndarray
    feature_ids: tuple

    @property
    def p(self) -> int:
        return self.ones.shape[1]

    @property
    def class_sizes(self):
        return np.array([self.N0, self.N1])

    def restrict(self, columns) -> "CountsSummary":
        columns = np.asarray(columns, dtype=int)
        return CountsSummary(self.n, self.N0, self.N1,
                             self.ones[:, columns], self.zeros[:, columns],
                             tuple(self.feature_ids[c] for c in columns))


def summarize(dataset: BinaryDataset) -> CountsSummary:
    if dataset.n == 0:
        raise ValueError("cannot summarize an empty dataset")
    X = dataset.features.astype(np.int64)
    y = dataset.labels
    ones = np.vstack([X[y == 0].sum(axis=0), X[y == 1].sum(axis=0)])
    N1 = int(y.sum())
    N0 = dataset.n - N1
    zeros = np.array([[N0], [N1]]) - ones
    ones.setflags(write=False)
    zeros.setflags(write=False)
    return CountsSummary(dataset.n, N0, N1, ones, zeros, dataset.feature_ids)
