"""Numerical building blocks: the beta-binomial U function, sample
correlations, fixed-grid quadrature and Inverse-Gamma quantile nodes.

Everything that multiplies probabilities works in log space; ``-inf``
stands for log 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

# Correlations within this distance of a threshold count as equal to it.
# Lattice points land exactly on common thresholds (e.g. 0.5) and the two
# evaluation routes may disagree in the last ulp.
CORRELATION_TIE_TOL = 1e-12

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_STIRLING_MIN = 10.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts for the alpha (midpoint) and theta (Simpson) rules."""

    alpha_nodes: int = 30
    theta_nodes: int = 21

    def __post_init__(self):
        if int(self.alpha_nodes) != self.alpha_nodes or self.alpha_nodes < 1:
            raise ValueError(f"alpha_nodes must be a positive integer, got {self.alpha_nodes}")
        if (int(self.theta_nodes) != self.theta_nodes or self.theta_nodes < 3
                or self.theta_nodes % 2 == 0):
            raise ValueError(f"theta_nodes must be an odd integer >= 3, got {self.theta_nodes}")

    def refined(self) -> "QuadratureSpec":
        """Twice the alpha nodes and twice the theta intervals."""
        return QuadratureSpec(2 * self.alpha_nodes, 2 * self.theta_nodes - 1)


def _stirling_tail(x):
    x2 = x * x
    return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * x2)) / x2) / x2) / x


def log_rising(f, n):
    """log of the rising factorial f (f+1) ... (f+n-1), elementwise.

    Uses the Stirling expansion of ``lgamma(f+n) - lgamma(f)`` for large
    ``f`` so that the difference keeps full relative accuracy; a plain
    ``gammaln`` difference loses about ``log10(f)`` digits there.
    ``f = 0`` gives ``-inf`` for ``n >= 1`` and 0 for ``n = 0``.
    """
    f = np.asarray(f, dtype=float)
    n = np.asarray(n, dtype=float)
    f, n = np.broadcast_arrays(f, n)
    out = np.zeros(f.shape)

    big = (f >= _STIRLING_MIN) & (n > 0)
    if big.any():
        fb, nb = f[big], n[big]
        s = fb + nb
        out[big] = ((fb - 0.5) * np.log1p(nb / fb) + nb * np.log(s) - nb
                    + _stirling_tail(s) - _stirling_tail(fb))

    small = (f > 0) & (f < _STIRLING_MIN) & (n > 0)
    if small.any():
        out[small] = special.gammaln(f[small] + n[small]) - special.gammaln(f[small])

    out[(f == 0) & (n > 0)] = -np.inf
    return out


def log_U_array(f0, f1, n0, n1):
    """Vectorized :func:`log_U` without argument checking.

    At most one of ``f0``, ``f1`` may be zero at any element.
    """
    f0 = np.asarray(f0, dtype=float)
    f1 = np.asarray(f1, dtype=float)
    n0 = np.asarray(n0, dtype=float)
    n1 = np.asarray(n1, dtype=float)
    return log_rising(f0, n0) + log_rising(f1, n1) - log_rising(f0 + f1, n0 + n1)


def log_U(f0: float, f1: float, n0: int, n1: int) -> float:
    r"""Log of the beta-binomial marginal likelihood ratio U.

    .. math::

        U(f_0, f_1, n_0, n_1) = \frac{\Gamma(f_0+f_1)}{\Gamma(f_0)\Gamma(f_1)}
            \frac{\Gamma(f_0+n_0)\Gamma(f_1+n_1)}{\Gamma(f_0+f_1+n_0+n_1)}

    which is the probability of one particular sequence with ``n0`` zeros
    and ``n1`` ones when the success rate has a Beta(f1, f0) prior.
    A zero pseudo-count is read through the product form: ``f0 = 0`` with
    ``n0 >= 1`` gives log 0, with ``n0 = 0`` the f0 products are empty.
    """
    if f0 < 0 or f1 < 0:
        raise ValueError("pseudo-counts must be nonnegative")
    if f0 == 0 and f1 == 0:
        raise ValueError("f0 and f1 cannot both be zero")
    if n0 < 0 or n1 < 0:
        raise ValueError("counts must be nonnegative")
    return float(log_U_array(f0, f1, n0, n1))


def sample_correlation(y, x) -> float:
    """Sample correlation of two sequences, or 0 when either has no spread."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.ndim != 1 or x.shape != y.shape:
        raise ValueError(f"sequences must be 1-d with equal length, got {y.shape} and {x.shape}")
    if y.size == 0:
        raise ValueError("sequences must be non-empty")
    dy = y - y.mean()
    dx = x - x.mean()
    syy = np.dot(dy, dy)
    sxx = np.dot(dx, dx)
    if syy == 0 or sxx == 0:
        return 0.0
    return float(np.dot(dy, x) / (math.sqrt(syy) * math.sqrt(sxx)))


def cor_counts_array(I0, I1, n: int, n1: int):
    """Vectorized :func:`cor_counts`, with the class-1 size ``n1 = n * ybar``.

    No range checking; degenerate denominators give exactly 0.
    """
    I0 = np.asarray(I0, dtype=float)
    I1 = np.asarray(I1, dtype=float)
    ybar = n1 / n
    s = I0 + I1
    num = (1.0 - ybar) * I1 - ybar * I0
    sxx = s - s * s / n
    syy = n * ybar * (1.0 - ybar)
    ok = (sxx > 0) & (syy > 0)
    out = np.zeros(np.broadcast(I0, I1).shape)
    with np.errstate(invalid="ignore", divide="ignore"):
        r = num / (math.sqrt(syy) * np.sqrt(np.where(ok, sxx, 1.0)))
    out[ok] = r[ok]
    return np.clip(out, -1.0, 1.0)


def class_size(n: int, ybar: float) -> int:
    """Return ``n * ybar`` as an int, rejecting non-integral products."""
    n1 = n * ybar
    n1_int = int(round(n1))
    if abs(n1 - n1_int) > 1e-9 * max(1, n):
        raise ValueError(f"n * ybar must be integral, got {n1}")
    return n1_int


def cor_counts(I0: int, I1: int, n: int, ybar: float) -> float:
    """Correlation of a binary feature with the labels from its lattice point.

    ``I0`` and ``I1`` count the cases with ``x = 1`` in class 0 and class 1;
    ``n`` is the number of cases and ``ybar`` the class-1 fraction.
    """
    n1 = class_size(n, ybar)
    n0 = n - n1
    if not (0 <= I0 <= n0) or not (0 <= I1 <= n1):
        raise ValueError(f"lattice point ({I0}, {I1}) outside [0, {n0}] x [0, {n1}]")
    return float(cor_counts_array(I0, I1, n, n1))


def feature_correlations(X, y):
    """Correlation of every column of the binary matrix ``X`` with ``y``."""
    X = np.asarray(X)
    y = np.asarray(y)
    n = y.shape[0]
    n1 = int(y.sum())
    I1 = X[y == 1].sum(axis=0)
    I0 = X[y == 0].sum(axis=0)
    return cor_counts_array(I0, I1, n, n1)


def exceeds(value, gamma):
    """``value > gamma`` with ties resolved by :data:`CORRELATION_TIE_TOL`."""
    return np.asarray(value) > np.asarray(gamma) + CORRELATION_TIE_TOL


def simpson_weights(M: int):
    """Composite Simpson weights for ``M`` equally spaced nodes on [0, 1]."""
    if int(M) != M or M < 3 or M % 2 == 0:
        raise ValueError(f"Simpson's rule needs an odd node count >= 3, got {M}")
    w = np.ones(M)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / (3.0 * (M - 1))


def simpson_nodes(M: int):
    return np.linspace(0.0, 1.0, M)


def simpson_integrate(f, M: int) -> float:
    """Integrate ``f`` over [0, 1] by composite Simpson on ``M`` nodes.

    ``f`` is called once with the array of nodes if it is vectorized,
    otherwise node by node.
    """
    w = simpson_weights(M)
    t = simpson_nodes(M)
    try:
        vals = np.asarray(f(t), dtype=float)
        if vals.shape != t.shape:
            raise ValueError
    except (TypeError, ValueError):
        vals = np.array([float(f(ti)) for ti in t])
    if not np.all(np.isfinite(vals)):
        raise ValueError("integrand must be finite at every node")
    return float(np.dot(w, vals))


def log_simpson(log_values, axis=-1):
    """Log of the Simpson integral given log-integrand values along ``axis``."""
    log_values = np.moveaxis(np.asarray(log_values, dtype=float), axis, -1)
    w = simpson_weights(log_values.shape[-1])
    return special.logsumexp(log_values, axis=-1, b=w)


def inverse_gamma_cdf(x, a: float, b: float):
    """CDF of the Inverse-Gamma(a, b) law, density ~ x^-(1+a) exp(-b/x)."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        return special.gammaincc(a, b / x)


def inverse_gamma_logpdf(x, a: float, b: float):
    x = np.asarray(x, dtype=float)
    return a * math.log(b) - special.gammaln(a) - (a + 1.0) * np.log(x) - b / x


def inverse_gamma_quantile(q: float, a: float, b: float, rtol: float = 1e-12) -> float:
    """Quantile of Inverse-Gamma(a, b) by bracketed root finding.

    Solves ``Q(a, t) = q`` for ``t = b / x`` where Q is the regularized
    upper incomplete gamma function.
    """
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must lie in (0, 1), got {q}")

    def g(t):
        return special.gammaincc(a, t) - q

    lo, hi = 1.0, 1.0
    while g(lo) < 0:
        lo *= 0.5
        if lo < 1e-300:
            raise FloatingPointError("failed to bracket the quantile")
    while g(hi) > 0:
        hi *= 2.0
        if hi > 1e300:
            raise FloatingPointError("failed to bracket the quantile")
    if lo == hi:
        return b / lo
    t = optimize.brentq(g, lo, hi, xtol=1e-300, rtol=rtol, maxiter=500)
    return b / t


def inverse_gamma_quantile_nodes(a: float, b: float, K: int):
    """The (i - 0.5)/K quantiles of Inverse-Gamma(a, b), i = 1..K."""
    if a <= 0 or b <= 0:
        raise ValueError("Inverse-Gamma shape and rate must be positive")
    if int(K) != K or K < 1:
        raise ValueError(f"K must be a positive integer, got {K}")
    levels = (np.arange(K) + 0.5) / K
    return np.array([inverse_gamma_quantile(q, a, b) for q in levels])
