"""Brute-force reference computations, kept independent of the package."""

import itertools
import math
from fractions import Fraction

import numpy as np


def log_U_product(f0, f1, n0, n1):
    """log U by the explicit product form."""
    terms = [math.log(f0 + l) for l in range(n0)]
    terms += [math.log(f1 + l) for l in range(n1)]
    terms += [-math.log(f0 + f1 + l) for l in range(n0 + n1)]
    return math.fsum(terms)


def U_product(f0, f1, n0, n1):
    """U by the product form, allowing a zero pseudo-count."""
    num = 1.0
    for l in range(n0):
        num *= f0 + l
    for l in range(n1):
        num *= f1 + l
    den = 1.0
    for l in range(n0 + n1):
        den *= f0 + f1 + l
    return num / den


def exact_cor_sign_vs(y, x, gamma):
    """Classify the sample correlation of 0/1 vectors against +-gamma exactly.

    Works with n times the centred sums, which are integers for 0/1 data.
    Returns +1 if COR > gamma, -1 if COR < -gamma, else 0.
    """
    n = len(y)
    sy = sum(y)
    sx = sum(x)
    sxy = sum(yi * xi for yi, xi in zip(y, x))
    num = n * sxy - sy * sx
    syy = sy * (n - sy)
    sxx = sx * (n - sx)
    if syy == 0 or sxx == 0:
        return 0
    g = Fraction(str(gamma))
    if num * num > g * g * syy * sxx:
        return 1 if num > 0 else -1
    return 0


def enumerate_region_masses(labels, gamma, alpha, thetas):
    """H+ and H- masses at each theta by visiting all 2^n feature vectors.

    The probability of one vector given (alpha, theta) is
    prod_y U(alpha*theta, alpha*(1-theta), ones_y, zeros_y), x = 1 paired
    with alpha*theta.
    """
    labels = list(labels)
    n = len(labels)
    N1 = sum(labels)
    N0 = n - N1
    cls = {}
    for x in itertools.product((0, 1), repeat=n):
        s = exact_cor_sign_vs(labels, x, gamma)
        if s == 0:
            continue
        I1 = sum(xi for xi, yi in zip(x, labels) if yi == 1)
        I0 = sum(xi for xi, yi in zip(x, labels) if yi == 0)
        cls[(I0, I1, s)] = cls.get((I0, I1, s), 0) + 1
    out = []
    for t in np.atleast_1d(thetas):
        a1, a0 = alpha * t, alpha * (1 - t)
        hp = hm = 0.0
        for (I0, I1, s), mult in cls.items():
            pr = mult * U_product(a1, a0, I0, N0 - I0) * U_product(a1, a0, I1, N1 - I1)
            if s > 0:
                hp += pr
            else:
                hm += pr
        out.append((hp, hm))
    return np.array(out)


def trapezoid(f, N):
    """Trapezoid rule on [0, 1] for a vectorized ``f``."""
    t = np.linspace(0.0, 1.0, N)
    v = np.asarray(f(t), dtype=float)
    h = 1.0 / (N - 1)
    return h * (v.sum() - 0.5 * (v[0] + v[-1]))


def brute_counts(X, y):
    n, p = len(X), len(X[0])
    ones = [[0] * p, [0] * p]
    zeros = [[0] * p, [0] * p]
    for i in range(n):
        for j in range(p):
            if X[i][j]:
                ones[y[i]][j] += 1
            else:
                zeros[y[i]][j] += 1
    return ones, zeros


def dense_feature_joint(I0, O0, I1, O1, alpha, ystar=None, xstar=None, N=100_001):
    """Trapezoid integral over theta of prod_y U(alpha*t, alpha*(1-t), I_y, O_y),
    optionally times the Bernoulli probability of a test bit in class ``ystar``.
    """
    t = np.linspace(0.0, 1.0, N)

    def f(t):
        v = np.array([U_product(alpha * ti, alpha * (1 - ti), I0, O0)
                      * U_product(alpha * ti, alpha * (1 - ti), I1, O1) for ti in t])
        if ystar is not None:
            I, Ny = (I1, I1 + O1) if ystar else (I0, I0 + O0)
            phi = (alpha * t + I) / (alpha + Ny)
            v = v * (phi if xstar else 1 - phi)
        return v

    return trapezoid(f, N)


def dense_predictive_p1(X, y, x, f0, f1, alpha_nodes, log_adjust=None, N=4001):
    """Class-1 predictive probability with every theta integral done densely."""
    X = np.asarray(X)
    y = np.asarray(y)
    N1 = int(y.sum())
    N0 = len(y) - N1
    psi = (f1 + N1) / (f0 + f1 + N0 + N1)
    scores = []
    for ystar in (0, 1):
        tot = 0.0
        for m, alpha in enumerate(alpha_nodes):
            logprod = 0.0 if log_adjust is None else log_adjust[m]
            for j in range(X.shape[1]):
                col = X[:, j]
                I0 = int(col[y == 0].sum())
                I1 = int(col[y == 1].sum())
                v = dense_feature_joint(I0, N0 - I0, I1, N1 - I1, alpha, ystar, int(x[j]), N)
                logprod += math.log(v)
            tot += math.exp(logprod)
        scores.append(tot * (psi if ystar else 1 - psi))
    return scores[1] / (scores[0] + scores[1])
