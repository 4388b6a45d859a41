"""Synthetic data from the binary naive Bayes model with a fixed alpha."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .counts import BinaryDataset


@dataclass(frozen=True)
class SyntheticSpec:
    alpha_true: float = 300.0
    p: int = 10000
    n_train: int = 200
    n_test: int = 2000
    balanced: bool = True
    seed: int = 0

    def __post_init__(self):
        if not self.alpha_true > 0:
            raise ValueError("alpha_true must be positive")
        if self.p < 1 or self.n_train < 1 or self.n_test < 0:
            raise ValueError("p and n_train must be positive, n_test nonnegative")
        if self.balanced and (self.n_train % 2 or self.n_test % 2):
            raise ValueError("balanced designs need even case counts")


@dataclass(frozen=True)
class LatentParameters:
    theta: np.ndarray
    phi0: np.ndarray
    phi1: np.ndarray


def _labels(n, balanced, rng):
    if balanced:
        return rng.permutation(np.repeat(np.array([0, 1], dtype=np.int8), n // 2))
    return (rng.random(n) < 0.5).astype(np.int8)


def _feature_stream(seed, j):
    # one independent substream per feature: adding features never
    # changes the earlier ones
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1, j)))


def simulate(spec: SyntheticSpec):
    """Draw ``(train, test, latent)`` for ``spec``.

    theta_j ~ Uniform(0, 1); phi_{0,j}, phi_{1,j} ~ Beta(alpha*theta_j,
    alpha*(1-theta_j)) each as a ratio of gamma draws; bits are Bernoulli.
    Labels are fixed half-and-half when ``spec.balanced``, otherwise fair
    coin flips.
    """
    label_rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(0,)))
    y_train = _labels(spec.n_train, spec.balanced, label_rng)
    y_test = _labels(spec.n_test, spec.balanced, label_rng)
    n = spec.n_train + spec.n_test
    y_all = np.concatenate([y_train, y_test])

    X = np.empty((n, spec.p), dtype=np.int8)
    theta = np.empty(spec.p)
    phi = np.empty((2, spec.p))
    a = spec.alpha_true
    for j in range(spec.p):
        rng = _feature_stream(spec.seed, j)
        t = rng.random()
        g1 = rng.standard_gamma(a * t, size=2)
        g0 = rng.standard_gamma(a * (1.0 - t), size=2)
        tot = g1 + g0
        f = np.where(tot > 0, g1 / np.where(tot > 0, tot, 1.0), t)
        theta[j] = t
        phi[:, j] = f
        X[:, j] = rng.random(n) < f[y_all]

    ids = tuple(f"f{j}" for j in range(spec.p))
    train = BinaryDataset(X[:spec.n_train], y_train, ids)
    test = BinaryDataset(X[spec.n_train:], y_test, ids)
    return train, test, LatentParameters(theta, phi[0].copy(), phi[1].copy())


def colon_standin(n_pos: int = 40, n_neg: int = 22, p: int = 2000, seed: int = 0,
                  informative: float = 0.1):
    """Real-valued stand-in shaped like a two-class expression matrix.

    Returns ``(values, labels, feature_ids)``. A fraction ``informative`` of
    the genes carry a class shift; the rest are noise.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2,)))
    labels = rng.permutation(np.r_[np.ones(n_pos, dtype=np.int8), np.zeros(n_neg, dtype=np.int8)])
    base = rng.normal(6.0, 1.5, size=p)
    scale = rng.gamma(4.0, 0.15, size=p)
    shift = np.where(rng.random(p) < informative, rng.normal(0.0, 0.8, size=p), 0.0)
    values = base + scale * (rng.standard_normal((labels.size, p)) + np.outer(labels, shift))
    ids = tuple(f"g{j}" for j in range(p))
    return np.exp(values), labels, ids
