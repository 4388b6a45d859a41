"""Probability that an omitted feature passes screening unnoticed.

For fixed training labels, a binary feature's correlation with ``y``
depends only on its lattice point ``(I0, I1)``: the numbers of ``x = 1``
cases inside class 0 and class 1. The feature is discarded unless the
point falls in H+ (correlation above ``gamma``) or H- (below ``-gamma``).
Swapping the coding of ``x`` maps H+ onto H- and leaves the prior
unchanged, so

    P(|COR| <= gamma | alpha, y) = 1 - 2 * int_0^1 P(H+ | alpha, theta, y) dtheta.

Given ``alpha`` and ``theta`` the two coordinates are independent
beta-binomial counts, and H+ is bounded by a monotone frontier, so the
double sum collapses into one pass over ``I1`` with a running
prefix sum over ``I0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .numerics import (
    CORRELATION_TIE_TOL,
    QuadratureSpec,
    class_size,
    cor_counts_array,
    exceeds,
    log_U_array,
    log_simpson,
    simpson_nodes,
    simpson_weights,
)

LOG_CLAMP = 1e-300


class QuadratureBreakdownWarning(RuntimeWarning):
    """The integrated H+ mass reached 1/2 and the log probability was clamped."""


@dataclass(frozen=True)
class LatticeFrontier:
    """Boundary of H+ for ``n`` cases with ``n1`` of them in class 1.

    ``r[i]`` is the largest ``I0`` with ``Cor(I0, b0 + i) > gamma``.
    An empty ``r`` means H+ is empty.
    """

    n: int
    n1: int
    gamma: float
    b0: int
    r: np.ndarray

    @property
    def n0(self) -> int:
        return self.n - self.n1

    @property
    def ybar(self) -> float:
        return self.n1 / self.n

    @property
    def empty(self) -> bool:
        return self.r.size == 0

    def contains(self, I0, I1):
        """Membership in H+ as described by the frontier."""
        I0 = np.asarray(I0)
        I1 = np.asarray(I1)
        if self.empty:
            return np.zeros(np.broadcast(I0, I1).shape, dtype=bool)
        idx = np.clip(I1 - self.b0, 0, self.r.size - 1)
        return (I1 >= self.b0) & (I0 <= self.r[idx])


def build_frontier(n: int, ybar: float, gamma: float) -> LatticeFrontier:
    """Locate ``b0`` and the per-row frontier ``r`` of H+.

    ``b0`` starts from the closed-form root of ``Cor(0, I1) = gamma`` and
    is checked against the defining inequality, which only matters when
    the root is an integer up to rounding.
    """
    if n < 2:
        raise ValueError("need at least two cases")
    n1 = class_size(n, ybar)
    n0 = n - n1
    if n1 in (0, n):
        raise ValueError("labels are all one class; every correlation is zero")
    if not np.isfinite(gamma) or gamma < 0:
        raise ValueError(f"gamma must be nonnegative, got {gamma}")
    yb = n1 / n

    def cor(I0, I1):
        return float(cor_counts_array(I0, I1, n, n1))

    if gamma == 0:
        b0 = 1
    else:
        g2 = gamma * gamma
        root = n * yb * g2 / (yb * g2 + 1.0 - yb)
        b0 = max(1, math.ceil(root))
        while b0 <= n1 and not exceeds(cor(0, b0), gamma):
            b0 += 1
        while b0 > 1 and exceeds(cor(0, b0 - 1), gamma):
            b0 -= 1
    if b0 > n1:
        return LatticeFrontier(n, n1, float(gamma), b0, np.zeros(0, dtype=int))

    r = np.empty(n1 - b0 + 1, dtype=int)
    I0 = 0
    for i, I1 in enumerate(range(b0, n1 + 1)):
        while I0 < n0 and exceeds(cor(I0 + 1, I1), gamma):
            I0 += 1
        r[i] = I0
    return LatticeFrontier(n, n1, float(gamma), b0, r)


def class_count_pmf(m: int, alpha, theta):
    """Beta-binomial pmf of the ``x = 1`` count among ``m`` cases.

    Broadcasts ``alpha`` against ``theta``; the count runs along a new last
    axis. Built from ``P(0)`` and the ratio
    ``P(I+1)/P(I) = (m-I)/(I+1) * (alpha*theta + I)/(alpha*(1-theta) + m-I-1)``
    accumulated in log space. ``theta`` of 0 or 1 gives a point mass.
    """
    alpha, theta = np.broadcast_arrays(np.asarray(alpha, dtype=float),
                                       np.asarray(theta, dtype=float))
    a1 = alpha * theta
    a0 = alpha * (1.0 - theta)
    out = np.zeros(alpha.shape + (m + 1,))
    at0 = theta <= 0.0
    at1 = theta >= 1.0
    inner = ~(at0 | at1)
    out[at0, 0] = 1.0
    out[at1, m] = 1.0
    if m == 0 or not inner.any():
        out[inner, 0] = 1.0
        return out

    a1i = a1[inner][:, None]
    a0i = a0[inner][:, None]
    I = np.arange(m, dtype=float)
    log_start = log_U_array(a1[inner], a0[inner], 0, m)[:, None]
    log_ratio = (np.log(m - I) - np.log(I + 1.0)
                 + np.log(a1i + I) - np.log(a0i + (m - I - 1.0)))
    logp = np.concatenate([log_start, log_start + np.cumsum(log_ratio, axis=1)], axis=1)
    out[inner] = np.exp(logp)
    return out


def _h_plus(frontier: LatticeFrontier, alpha, theta):
    shape = np.broadcast(np.asarray(alpha), np.asarray(theta)).shape
    if frontier.empty:
        return np.zeros(shape)
    p1 = class_count_pmf(frontier.n1, alpha, theta)[..., frontier.b0:]
    # running prefix sum over I0, read off at the frontier of each row
    c0 = np.cumsum(class_count_pmf(frontier.n0, alpha, theta), axis=-1)
    return np.sum(p1 * c0[..., frontier.r], axis=-1)


def sum_H_plus_given_theta(frontier: LatticeFrontier, alpha, theta):
    """Mass of H+ for one feature given ``alpha`` and ``theta``."""
    out = _h_plus(frontier, alpha, theta)
    return float(out) if out.ndim == 0 else out


def region_masses_given_theta(frontier: LatticeFrontier, alpha: float, theta: float) -> dict:
    """Masses of H+, H-, L+, L- and L0 by visiting every lattice point.

    Slow; used to cross-check the frontier route.
    """
    n, n1, n0, g = frontier.n, frontier.n1, frontier.n0, frontier.gamma
    p0 = class_count_pmf(n0, alpha, theta)
    p1 = class_count_pmf(n1, alpha, theta)
    joint = np.outer(p0, p1)
    I0, I1 = np.meshgrid(np.arange(n0 + 1), np.arange(n1 + 1), indexing="ij")
    c = cor_counts_array(I0, I1, n, n1)
    zero = np.abs(c) <= CORRELATION_TIE_TOL
    hp = exceeds(c, g)
    hm = exceeds(-c, g)
    return {
        "H+": float(joint[hp].sum()),
        "H-": float(joint[hm].sum()),
        "L0": float(joint[zero].sum()),
        "L+": float(joint[~zero & (c > 0) & ~hp].sum()),
        "L-": float(joint[~zero & (c < 0) & ~hm].sum()),
    }


def integrated_H_plus(frontier: LatticeFrontier, alpha, quad: QuadratureSpec):
    """Simpson integral over theta of the H+ mass, for each alpha."""
    alpha = np.asarray(alpha, dtype=float)
    theta = simpson_nodes(quad.theta_nodes)
    vals = _h_plus(frontier, alpha[..., None], theta)
    return vals @ simpson_weights(quad.theta_nodes)


def nonselection_log_prob(frontier: LatticeFrontier, alpha, quad: QuadratureSpec = QuadratureSpec()):
    """log P(|COR| <= gamma | alpha, y) for a single feature."""
    s = np.asarray(integrated_H_plus(frontier, alpha, quad))
    rest = 1.0 - 2.0 * s
    low = rest < LOG_CLAMP
    if np.any(low):
        warnings.warn(
            f"integrated H+ mass {s.max():.6g} leaves no room for discarded features; "
            "log probability clamped", QuadratureBreakdownWarning, stacklevel=2)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(low, math.log(LOG_CLAMP), np.log1p(-2.0 * np.maximum(s, 0.0)))
    return float(out) if out.ndim == 0 else out


def adjustment_log_factor(frontier, alpha, omitted_count: int, quad: QuadratureSpec = QuadratureSpec()):
    """``omitted_count`` times the single-feature log nonselection probability."""
    if omitted_count < 0:
        raise ValueError("omitted_count must be nonnegative")
    if omitted_count == 0:
        zero = np.zeros(np.shape(alpha))
        return float(zero) if zero.ndim == 0 else zero
    return omitted_count * nonselection_log_prob(frontier, alpha, quad)


@dataclass(frozen=True)
class AdjustmentCache:
    """Per-alpha-node log adjustment for one training label vector and gamma."""

    alpha_nodes: np.ndarray
    log_nonselection: np.ndarray
    omitted_count: int
    gamma: float | None

    @property
    def log_factor(self):
        if self.omitted_count == 0:
            return np.zeros_like(self.alpha_nodes)
        return self.omitted_count * self.log_nonselection


def build_adjustment_cache(labels, gamma: float, alpha_nodes, omitted_count: int,
                           quad: QuadratureSpec = QuadratureSpec()) -> AdjustmentCache:
    alpha_nodes = np.asarray(alpha_nodes, dtype=float)
    if omitted_count == 0:
        return AdjustmentCache(alpha_nodes, np.zeros_like(alpha_nodes), 0,
                               None if gamma is None else float(gamma))
    labels = np.asarray(labels)
    n = labels.size
    frontier = build_frontier(n, labels.sum() / n, gamma)
    logp = np.asarray(nonselection_log_prob(frontier, alpha_nodes, quad), dtype=float)
    return AdjustmentCache(alpha_nodes, logp, int(omitted_count), float(gamma))
