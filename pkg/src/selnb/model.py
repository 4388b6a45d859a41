"""Bayesian naive Bayes for binary data with psi and phi integrated out.

Remaining unknowns are ``alpha`` (Inverse-Gamma prior) and one ``theta``
per feature (Uniform prior). The ``alpha`` integral is a midpoint rule on
prior quantiles, so the prior weight is implicit; each ``theta`` integral
is Simpson's rule on [0, 1]. Throughout, ``alpha * theta`` is the
pseudo-count paired with ``x = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_binary_labels, check_binary_matrix, check_same_length
from .adjustment import AdjustmentCache, build_adjustment_cache
from .counts import BinaryDataset, CountsSummary, summarize
from .numerics import (
    QuadratureSpec,
    inverse_gamma_logpdf,
    inverse_gamma_quantile_nodes,
    log_simpson,
    log_U_array,
    simpson_nodes,
)
from .selection import SelectionResult, select_features

_FEATURE_BLOCK = 256


@dataclass(frozen=True)
class PriorConfig:
    """Beta(f1, f0) prior on psi and Inverse-Gamma(a, b) prior on alpha."""

    f0: float = 1.0
    f1: float = 1.0
    a: float = 0.5
    b: float = 5.0

    def __post_init__(self):
        for name in ("f0", "f1", "a", "b"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"prior parameter {name} must be positive, got {v}")

    @classmethod
    def from_string(cls, text: str) -> "PriorConfig":
        """Parse ``"f0,f1,a,b"``."""
        parts = [float(v) for v in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"expected f0,f1,a,b, got {text!r}")
        return cls(*parts)


def class_predictive(prior: PriorConfig, N0: int, N1: int) -> float:
    """Posterior mean of psi, the probability that a new case is class 1."""
    if N0 < 0 or N1 < 0:
        raise ValueError("class counts must be nonnegative")
    return (prior.f1 + N1) / (prior.f0 + prior.f1 + N0 + N1)


def _log_integrand(ones, zeros, alpha, theta):
    """log prod_y U(alpha*theta, alpha*(1-theta), I_y, O_y).

    ``ones``/``zeros`` have shape (2, k); the result has shape (k, K, M).
    """
    a1 = alpha[:, None] * theta[None, :]
    a0 = alpha[:, None] * (1.0 - theta[None, :])
    a1 = a1[None]
    a0 = a0[None]
    out = 0.0
    for y in (0, 1):
        out = out + log_U_array(a1, a0, ones[y][:, None, None], zeros[y][:, None, None])
    return out


def _log_phi_hat(ones_y, N_y, alpha, theta):
    """log of the posterior means (alpha*theta + I)/(alpha + N) and their complements."""
    a1 = alpha[:, None] * theta[None, :]
    denom = (alpha + N_y)[:, None]
    num1 = a1[None] + ones_y[:, None, None]
    num0 = (alpha[:, None] - a1)[None] + (N_y - ones_y)[:, None, None]
    with np.errstate(divide="ignore"):
        return np.log(num0 / denom), np.log(num1 / denom)


def _grid_tables(ones, zeros, N, alpha, quad):
    """Training log marginals (k, K) and predictive log factors (k, K, 2, 2)."""
    theta = simpson_nodes(quad.theta_nodes)
    k = ones.shape[1]
    marg = np.empty((k, alpha.size))
    fac = np.empty((k, alpha.size, 2, 2))
    with np.errstate(divide="ignore", invalid="ignore"):
        for start in range(0, k, _FEATURE_BLOCK):
            sl = slice(start, start + _FEATURE_BLOCK)
            L = _log_integrand(ones[:, sl], zeros[:, sl], alpha, theta)
            marg[sl] = log_simpson(L)
            for ystar in (0, 1):
                lz, lo = _log_phi_hat(ones[ystar, sl], N[ystar], alpha, theta)
                fac[sl, :, ystar, 0] = log_simpson(L + lz)
                fac[sl, :, ystar, 1] = log_simpson(L + lo)
    return marg, fac


def _counts_args(I0j, O0j, I1j, O1j):
    ones = np.array([[I0j], [I1j]], dtype=float)
    zeros = np.array([[O0j], [O1j]], dtype=float)
    if np.any(ones < 0) or np.any(zeros < 0):
        raise ValueError("counts must be nonnegative")
    return ones, zeros


def feature_train_log_marginal(I0j, O0j, I1j, O1j, alpha, M: int = 21):
    """log of the training likelihood of one feature, theta integrated out.

    ``alpha`` may be a scalar or an array of nodes.
    """
    ones, zeros = _counts_args(I0j, O0j, I1j, O1j)
    alpha_arr = np.atleast_1d(np.asarray(alpha, dtype=float))
    N = ones[:, 0] + zeros[:, 0]
    marg, _ = _grid_tables(ones, zeros, N, alpha_arr, QuadratureSpec(1, M))
    return float(marg[0, 0]) if np.ndim(alpha) == 0 else marg[0]


def feature_predictive_log_factor(I0j, O0j, I1j, O1j, alpha, ystar: int, xstar: int, M: int = 21):
    """log of the joint probability of a test bit and the training column.

    The class size of ``ystar`` is implied by its one and zero counts.
    """
    if ystar not in (0, 1) or xstar not in (0, 1):
        raise ValueError("ystar and xstar must be bits")
    ones, zeros = _counts_args(I0j, O0j, I1j, O1j)
    alpha_arr = np.atleast_1d(np.asarray(alpha, dtype=float))
    N = ones[:, 0] + zeros[:, 0]
    _, fac = _grid_tables(ones, zeros, N, alpha_arr, QuadratureSpec(1, M))
    out = fac[0, :, ystar, xstar]
    return float(out[0]) if np.ndim(alpha) == 0 else out


@dataclass(frozen=True)
class AlphaGrid:
    """Everything prediction needs, tabulated at the alpha quadrature nodes.

    Attributes
    ----------
    nodes : (K,) increasing prior quantiles of alpha
    log_train_marginal : (k, K)
    log_factor : (k, K, 2, 2), indexed ``[feature, node, ystar, xstar]``
    log_adjustment : (K,) log P(S | alpha, y); zeros when nothing was omitted
    psi_hat : posterior mean of the class-1 probability
    """

    nodes: np.ndarray
    log_train_marginal: np.ndarray
    log_factor: np.ndarray
    log_adjustment: np.ndarray
    psi_hat: float
    prior: PriorConfig
    quad: QuadratureSpec

    @property
    def k(self) -> int:
        return self.log_factor.shape[0]


def build_alpha_grid(summary: CountsSummary, prior: PriorConfig = PriorConfig(),
                     quad: QuadratureSpec = QuadratureSpec(),
                     adjustment: AdjustmentCache | None = None,
                     labels=None, gamma: float | None = None,
                     omitted_count: int = 0) -> AlphaGrid:
    """Tabulate factors for the features in ``summary``.

    The adjustment is taken from ``adjustment`` if given, otherwise built
    from ``labels``, ``gamma`` and ``omitted_count``.
    """
    nodes = inverse_gamma_quantile_nodes(prior.a, prior.b, quad.alpha_nodes)
    ones = np.asarray(summary.ones, dtype=float)
    zeros = np.asarray(summary.zeros, dtype=float)
    N = np.array([summary.N0, summary.N1], dtype=float)
    marg, fac = _grid_tables(ones, zeros, N, nodes, quad)
    if adjustment is None:
        if omitted_count and (labels is None or gamma is None):
            raise ValueError("labels and gamma are required when features were omitted")
        adjustment = build_adjustment_cache(labels, gamma, nodes, omitted_count, quad)
    elif adjustment.alpha_nodes.shape != nodes.shape:
        raise ValueError("adjustment cache was built on a different alpha grid")
    psi = class_predictive(prior, summary.N0, summary.N1)
    for arr in (nodes, marg, fac):
        arr.setflags(write=False)
    return AlphaGrid(nodes, marg, fac, np.asarray(adjustment.log_factor, dtype=float),
                     psi, prior, quad)


def _log_class_scores(grid: AlphaGrid, X, corrected: bool):
    X = np.asarray(X, dtype=float)
    adj = grid.log_adjustment if corrected else 0.0
    logK = np.log(grid.nodes.size)
    scores = []
    for ystar in (0, 1):
        f0 = grid.log_factor[:, :, ystar, 0]
        f1 = grid.log_factor[:, :, ystar, 1]
        per_node = X @ f1 + (1.0 - X) @ f0 + adj
        log_prior = np.log(grid.psi_hat if ystar else 1.0 - grid.psi_hat)
        scores.append(log_prior + special.logsumexp(per_node, axis=1) - logK)
    return scores


def predict_proba_from_grid(grid: AlphaGrid, X, corrected: bool = True):
    """Class-1 probabilities for the rows of ``X`` (columns = grid features)."""
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[None, :]
    X = check_binary_matrix(X)
    if X.shape[1] != grid.k:
        raise ValueError(f"expected {grid.k} features, got {X.shape[1]}")
    s0, s1 = _log_class_scores(grid, X, corrected)
    return special.expit(s1 - s0)


@dataclass(frozen=True)
class PredictiveDistribution:
    p1: float
    corrected: bool

    @property
    def p0(self) -> float:
        return 1.0 - self.p1


def predict(test_features, summary: CountsSummary, selection: SelectionResult,
            prior: PriorConfig = PriorConfig(), quad: QuadratureSpec = QuadratureSpec(),
            corrected: bool = True, labels=None) -> PredictiveDistribution:
    """Predictive distribution for one test case.

    ``summary`` covers the retained features only, in selection order;
    ``labels`` are the training labels, needed for the adjustment.
    """
    x = np.asarray(test_features)
    if x.ndim != 1 or x.size != selection.k:
        raise ValueError(f"test vector must have length {selection.k}")
    if summary.p != selection.k:
        raise ValueError("summary and selection disagree on the retained features")
    omitted = selection.omitted_count if corrected else 0
    grid = build_alpha_grid(summary, prior, quad, labels=labels,
                            gamma=selection.gamma, omitted_count=omitted)
    p1 = predict_proba_from_grid(grid, x[None, :], corrected)[0]
    return PredictiveDistribution(float(p1), bool(corrected))


def posterior_alpha_from_grid(grid: AlphaGrid, corrected: bool = True):
    """Approximate posterior density of log(alpha) at the grid nodes.

    Node likelihoods are rescaled to sum to K, then multiplied by the
    Jacobian ``alpha * P(alpha)``. Returns ``(log_alpha, density)``.
    """
    lp = grid.log_train_marginal.sum(axis=0)
    if corrected:
        lp = lp + grid.log_adjustment
    w = np.exp(lp - lp.max())
    w *= grid.nodes.size / w.sum()
    jac = grid.nodes * np.exp(inverse_gamma_logpdf(grid.nodes, grid.prior.a, grid.prior.b))
    return np.log(grid.nodes), w * jac


def posterior_alpha_density(summary: CountsSummary, selection: SelectionResult | None,
                            prior: PriorConfig = PriorConfig(), quad: QuadratureSpec = QuadratureSpec(),
                            corrected: bool = True, labels=None):
    omitted = selection.omitted_count if (corrected and selection is not None) else 0
    gamma = selection.gamma if selection is not None else None
    grid = build_alpha_grid(summary, prior, quad, labels=labels, gamma=gamma, omitted_count=omitted)
    return posterior_alpha_from_grid(grid, corrected)


class SelectionCorrectedNB(ClassifierMixin, BaseEstimator):
    """Binary naive Bayes whose posterior accounts for correlation screening.

    Features are screened on the training data, either keeping the
    ``n_features_to_select`` most correlated ones or every feature with
    ``|COR| > threshold``. With ``corrected=True`` the likelihood of
    ``alpha`` is multiplied by the probability that each discarded feature
    would have been discarded, which removes the overconfidence caused by
    screening. With neither selection parameter set, all features are used.

    Parameters
    ----------
    n_features_to_select : int, optional
    threshold : float, optional
    corrected : bool, default True
    f0, f1 : float, default 1
        Beta prior pseudo-counts for the class probability.
    a, b : float, default 0.5 and 5
        Shape and rate of the Inverse-Gamma prior on alpha.
    alpha_nodes : int, default 30
    theta_nodes : int, default 21
        Must be odd.
    random_state : int or None
        Seeds tie-breaking among equally correlated features.

    Attributes
    ----------
    classes_, n_features_in_, selection_, summary_, grid_, gamma_
    """

    def __init__(self, n_features_to_select=None, threshold=None, corrected=True,
                 f0=1.0, f1=1.0, a=0.5, b=5.0, alpha_nodes=30, theta_nodes=21,
                 random_state=None):
        self.n_features_to_select = n_features_to_select
        self.threshold = threshold
        self.corrected = corrected
        self.f0 = f0
        self.f1 = f1
        self.a = a
        self.b = b
        self.alpha_nodes = alpha_nodes
        self.theta_nodes = theta_nodes
        self.random_state = random_state

    def _prior(self):
        return PriorConfig(self.f0, self.f1, self.a, self.b)

    def _quad(self):
        return QuadratureSpec(self.alpha_nodes, self.theta_nodes)

    def fit(self, X, y):
        X = check_binary_matrix(X)
        y = check_binary_labels(y)
        check_same_length(X, y)
        if X.shape[0] == 0:
            raise ValueError("cannot fit on zero cases")
        dataset = BinaryDataset(X, y)
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = dataset.p
        if self.n_features_to_select is None and self.threshold is None:
            cols = np.arange(dataset.p)
            self.selection_ = SelectionResult(cols, dataset.feature_ids, dataset.p, 0.0,
                                              np.zeros(dataset.p))
        else:
            self.selection_ = select_features(dataset, self.n_features_to_select,
                                              self.threshold, self.random_state)
        self.gamma_ = self.selection_.gamma
        self.summary_ = summarize(dataset).restrict(self.selection_.columns)
        omitted = self.selection_.omitted_count if self.corrected else 0
        self.grid_ = build_alpha_grid(self.summary_, self._prior(), self._quad(),
                                      labels=y, gamma=self.gamma_, omitted_count=omitted)
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "grid_")
        X = check_binary_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        p1 = predict_proba_from_grid(self.grid_, X[:, self.selection_.columns], self.corrected)
        return np.column_stack([1.0 - p1, p1])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(int)

    def posterior_alpha(self):
        """``(log_alpha, density)`` of the fitted posterior over alpha."""
        check_is_fitted(self, "grid_")
        return posterior_alpha_from_grid(self.grid_, self.corrected)
