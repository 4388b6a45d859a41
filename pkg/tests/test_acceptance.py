"""Acceptance checks, one or more tests per numbered criterion.

``pytest -v`` prints a PASS/FAIL line per criterion at the end of the run.
Set ``SELNB_COLON_DATA`` to a delimited expression file (label column
``label``, or ``SELNB_COLON_LABEL``) to also run the external-data check.
"""

import itertools
import math
import os
import time
from dataclasses import replace

import numpy as np
import pytest

from selnb import BinaryDataset, PriorConfig, QuadratureSpec, SelectionCorrectedNB, summarize
from selnb.adjustment import (
    adjustment_log_factor,
    build_frontier,
    region_masses_given_theta,
    sum_H_plus_given_theta,
)
from selnb.datagen import SyntheticSpec, colon_standin
from selnb.experiments import ExperimentConfig, partitioned_loocv, run_simulation_study
from selnb.io import read_table
from selnb.model import _log_class_scores, build_alpha_grid, predict_proba_from_grid
from selnb.numerics import cor_counts_array, inverse_gamma_quantile_nodes, log_U, simpson_weights
from selnb.selection import select_top_k

from oracles import enumerate_region_masses

GRID_N = (4, 6, 8, 10, 12)
GRID_GAMMA = (0.1, 0.3, 0.5, 0.7, 0.9)
GRID_ALPHA = (0.5, 5.0, 50.0)
GRID_THETA = (0.1, 0.5, 0.9)
SEEDS = range(5)


def _balanced(n):
    return [0] * (n // 2) + [1] * (n // 2)


@pytest.fixture(scope="module")
def oracle_masses():
    """(H+, H-) from 2^n enumeration for every grid point, plus the elapsed time."""
    t0 = time.perf_counter()
    out = {}
    for n, g in itertools.product(GRID_N, GRID_GAMMA):
        for a in GRID_ALPHA:
            out[n, g, a] = enumerate_region_masses(_balanced(n), g, a, GRID_THETA)
    return out, time.perf_counter() - t0


@pytest.mark.criterion(1)
def test_h_plus_matches_enumeration(oracle_masses, record_property):
    masses, oracle_time = oracle_masses
    t0 = time.perf_counter()
    worst = 0.0
    for (n, g, a), ref in masses.items():
        fr = build_frontier(n, 0.5, g)
        got = sum_H_plus_given_theta(fr, a, np.array(GRID_THETA))
        worst = max(worst, float(np.max(np.abs(got - ref[:, 0]))))
    elapsed = time.perf_counter() - t0 + oracle_time
    record_property("detail", f"max |diff| {worst:.1e}, {elapsed:.2f} s")
    assert worst <= 1e-10
    assert elapsed < 10


@pytest.mark.criterion(2)
def test_h_minus_equals_h_plus(oracle_masses, record_property):
    masses, _ = oracle_masses
    w = simpson_weights(21)
    nodes = np.linspace(0, 1, 21)
    worst_point = worst_int = 0.0
    for (n, g, a), ref in masses.items():
        fr = build_frontier(n, 0.5, g)
        # pointwise the regions trade places under theta -> 1 - theta
        hm = np.array([region_masses_given_theta(fr, a, t)["H-"] for t in GRID_THETA])
        hp = sum_H_plus_given_theta(fr, a, np.array(GRID_THETA))
        worst_point = max(worst_point, float(np.max(np.abs(hp - hm[::-1]))),
                          float(np.max(np.abs(hm - ref[:, 1]))))
        ip = w @ sum_H_plus_given_theta(fr, a, nodes)
        im = w @ np.array([region_masses_given_theta(fr, a, t)["H-"] for t in nodes])
        worst_int = max(worst_int, abs(ip - im))
    record_property("detail", f"pointwise {worst_point:.1e}, integrated {worst_int:.1e}")
    assert worst_point <= 1e-10
    assert worst_int <= 1e-10


@pytest.mark.criterion(3)
def test_no_omission_identity(record_property):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(4, 30))
        p = int(rng.integers(1, 12))
        y = np.r_[0, 1, rng.integers(0, 2, n - 2)]
        X = rng.integers(0, 2, (n, p))
        Xt = rng.integers(0, 2, (5, p))
        kw = dict(n_features_to_select=p, alpha_nodes=10, theta_nodes=11, random_state=0)
        on = SelectionCorrectedNB(corrected=True, **kw).fit(X, y).predict_proba(Xt)
        off = SelectionCorrectedNB(corrected=False, **kw).fit(X, y).predict_proba(Xt)
        worst = max(worst, float(np.max(np.abs(on - off))))
    record_property("detail", f"max |diff| {worst:.1e}")
    assert worst <= 1e-12


# desk-scale simulation shared by criteria 4 to 7

DESK = dict(alpha_true=300.0, p=1000, n_train=200, n_test=1000)


@pytest.fixture(scope="module")
def desk_runs():
    cfg = ExperimentConfig(prior=PriorConfig(1, 1, 0.5, 5), quad=QuadratureSpec(30, 21))
    runs = []
    for seed in SEEDS:
        spec = SyntheticSpec(seed=seed, **DESK)
        report, _, preds = run_simulation_study(spec, [10, 100], cfg, return_predictions=True)
        runs.append((report, preds))
    return runs


def _entry(report, k):
    return next(e for e in report["subsets"] if e["k"] == k)


def _gap(metrics):
    return metrics["error_rate"] - metrics["expected_error_rate"]


@pytest.mark.slow
@pytest.mark.criterion(4)
def test_calibration_gap(desk_runs, record_property):
    unc = np.mean([_gap(_entry(r, 10)["uncorrected"]["metrics"]) for r, _ in desk_runs])
    cor = np.mean([_gap(_entry(r, 10)["corrected"]["metrics"]) for r, _ in desk_runs])
    record_property("detail", f"uncorrected gap {unc:.3f}, corrected gap {cor:+.3f}")
    assert unc >= 0.05
    assert abs(cor) <= 0.03


@pytest.mark.slow
@pytest.mark.criterion(5)
@pytest.mark.parametrize("k", [10, 100])
def test_metric_ordering(desk_runs, k, record_property):
    wins = 0
    for report, _ in desk_runs:
        c = _entry(report, k)["corrected"]["metrics"]
        u = _entry(report, k)["uncorrected"]["metrics"]
        wins += (c["mean_neg_log_prob"] <= u["mean_neg_log_prob"]
                 and c["mean_squared_error"] <= u["mean_squared_error"])
    record_property("detail", f"k={k}: {wins}/5 seeds")
    assert wins >= 4


@pytest.mark.slow
@pytest.mark.criterion(6)
def test_posterior_alpha_modes(desk_runs, record_property):
    modes = []
    for report, _ in desk_runs:
        post = _entry(report, 10)["posterior_log_alpha"]
        all_mode = int(np.argmax(report["all_features"]["posterior_log_alpha"]["density"]))
        modes.append((int(np.argmax(post["corrected"])), int(np.argmax(post["uncorrected"])), all_mode))
    record_property("detail", "node index corrected/uncorrected/all per seed: "
                    + " ".join(f"{c}/{u}/{a}" for c, u, a in modes))
    for c, u, a in modes:
        assert abs(c - a) <= 1
        assert u < a


@pytest.mark.slow
@pytest.mark.criterion(7)
def test_quadrature_refinement(desk_runs, record_property):
    fine = ExperimentConfig(quad=QuadratureSpec(30, 21).refined())
    worst = {"corrected": 0.0, "uncorrected": 0.0}
    for seed, (_, preds) in zip(SEEDS, desk_runs):
        spec = SyntheticSpec(seed=seed, **DESK)
        _, _, fine_preds = run_simulation_study(spec, [10], fine, include_all=False,
                                                return_predictions=True)
        for i, name in enumerate(("corrected", "uncorrected")):
            diff = np.max(np.abs(fine_preds[10][i] - preds[10][i]))
            worst[name] = max(worst[name], float(diff))
    record_property("detail", f"max change corrected {worst['corrected']:.2e}, "
                    f"uncorrected {worst['uncorrected']:.2e}")
    assert max(worst.values()) < 1e-3


@pytest.mark.criterion(8)
def test_adjustment_cost_independent_of_omitted_count(record_property):
    rng = np.random.default_rng(0)
    y = rng.permutation(np.r_[np.zeros(100, int), np.ones(100, int)])
    fr = build_frontier(200, y.mean(), 0.2)
    alpha = inverse_gamma_quantile_nodes(0.5, 5, 30)
    quad = QuadratureSpec(30, 21)

    def best(count, reps=40):
        times = []
        for _ in range(reps):
            t0 = time.perf_counter()
            adjustment_log_factor(fr, alpha, count, quad)
            times.append(time.perf_counter() - t0)
        return min(times)

    best(10, 5)
    small, large = [], []
    for _ in range(3):
        small.append(best(10))
        large.append(best(10_000))
    ratio = max(min(large) / min(small), min(small) / min(large))
    record_property("detail", f"time ratio {ratio:.3f}")
    assert ratio <= 1.10


@pytest.mark.slow
@pytest.mark.criterion(9)
def test_pipeline_on_standin(record_property):
    values, labels, ids = colon_standin()
    assert values.shape == (62, 2000)
    cfg = ExperimentConfig(k=5, seed=0)
    rep = partitioned_loocv(values, labels, ids, cfg, groups=10)
    assert len(rep["groups"]) == 10
    assert sum(len(g["cases"]) for g in rep["groups"]) == 620
    gammas = [c["gamma"] for g in rep["groups"] for c in g["cases"] if "gamma" in c]
    u, c = rep["uncorrected"]["error_rate"], rep["corrected"]["error_rate"]
    record_property("detail", f"stand-in error rates uncorrected {u:.3f}, corrected {c:.3f}, "
                    f"median gamma {np.median(gammas):.2f}")
    assert 0 <= u <= 1 and 0 <= c <= 1


@pytest.mark.slow
@pytest.mark.criterion(9)
@pytest.mark.skipif("SELNB_COLON_DATA" not in os.environ, reason="no external colon data file")
def test_pipeline_on_colon_data(record_property):
    values, labels, ids = read_table(os.environ["SELNB_COLON_DATA"],
                                     os.environ.get("SELNB_COLON_LABEL", "label"))
    rep = partitioned_loocv(values, labels, ids, ExperimentConfig(k=5, seed=0), groups=10)
    u, c = rep["uncorrected"]["error_rate"], rep["corrected"]["error_rate"]
    record_property("detail", f"colon error rates uncorrected {u:.3f}, corrected {c:.3f}")
    assert abs(u - 0.194) <= 0.05
    assert abs(c - 0.182) <= 0.05


@pytest.mark.criterion(10)
def test_beta_binomial_normalization(record_property):
    worst = 0.0
    for f0, f1 in itertools.product((1e-3, 0.5, 1.0, 7.0, 300.0, 1e5), repeat=2):
        for m in range(21):
            s = math.fsum(math.comb(m, i) * math.exp(log_U(f0, f1, m - i, i)) for i in range(m + 1))
            worst = max(worst, abs(s - 1))
    record_property("detail", f"normalization {worst:.1e}")
    assert worst <= 1e-10


@pytest.mark.criterion(10)
def test_cor_counts_lattice_identities():
    for n in range(2, 51):
        for n1 in range(1, n):
            I0, I1 = np.meshgrid(np.arange(n - n1 + 1), np.arange(n1 + 1), indexing="ij")
            c = cor_counts_array(I0, I1, n, n1)
            assert np.max(np.abs(c + c[::-1, ::-1])) <= 1e-12
            s = I0 + I1
            ok = (s > 0) & (s < n)
            down = ok[1:, :] & ok[:-1, :]
            up = ok[:, 1:] & ok[:, :-1]
            assert np.all(np.diff(c, axis=0)[down] < 0)
            assert np.all(np.diff(c, axis=1)[up] > 0)


@pytest.mark.criterion(10)
def test_predictive_normalization(record_property):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(30):
        n, p = int(rng.integers(6, 40)), int(rng.integers(2, 30))
        y = np.r_[0, 1, rng.integers(0, 2, n - 2)]
        ds = BinaryDataset(rng.integers(0, 2, (n, p)), y)
        k = int(rng.integers(1, p + 1))
        sel = select_top_k(ds, k, 0)
        grid = build_alpha_grid(summarize(ds).restrict(sel.columns), quad=QuadratureSpec(10, 11),
                                labels=y, gamma=sel.gamma, omitted_count=sel.omitted_count)
        Xt = rng.integers(0, 2, (8, k))
        for corrected in (True, False):
            s0, s1 = _log_class_scores(grid, Xt, corrected)
            norm = np.logaddexp(s0, s1)
            total = np.exp(s0 - norm) + np.exp(s1 - norm)
            worst = max(worst, float(np.max(np.abs(total - 1))))
            p1 = predict_proba_from_grid(grid, Xt, corrected)
            worst = max(worst, float(np.max(np.abs(p1 - np.exp(s1 - norm)))))
    record_property("detail", f"max |sum - 1| {worst:.1e}")
    assert worst <= 1e-12


@pytest.mark.slow
def test_finer_theta_grids_converge(desk_runs):
    """Supporting diagnostic: the refinement error is theta-quadrature error and
    vanishes once M is large; doubling K alone barely moves anything."""
    spec = SyntheticSpec(seed=0, **DESK)
    runs = {}
    for quad in (QuadratureSpec(30, 81), QuadratureSpec(60, 161), QuadratureSpec(60, 21)):
        _, _, preds = run_simulation_study(spec, [10], ExperimentConfig(quad=quad),
                                           include_all=False, return_predictions=True)
        runs[quad] = preds[10]
    base = desk_runs[0][1][10]
    fine_a, fine_b = runs[QuadratureSpec(30, 81)], runs[QuadratureSpec(60, 161)]
    for i in range(2):
        assert np.max(np.abs(fine_a[i] - fine_b[i])) < 1e-3
        assert np.max(np.abs(runs[QuadratureSpec(60, 21)][i] - base[i])) < 1e-3
