"""Experiment orchestration: leave-one-out studies and simulation studies."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .adjustment import build_adjustment_cache
from .counts import BinaryDataset, summarize
from .datagen import SyntheticSpec, simulate
from .metrics import MetricsReport, calibration_table
from .model import PriorConfig, build_alpha_grid, posterior_alpha_from_grid, predict_proba_from_grid
from .numerics import QuadratureSpec, feature_correlations, inverse_gamma_quantile_nodes
from .preprocessing import MEDIAN_TIE_RULE, binarize_by_median, partition_features
from .selection import select_by_threshold, select_top_k

CORRECTED_MODES = ("both", "on", "off")
# spawn key for the feature partition; fold seeds use the case index
_PARTITION_KEY = 1_000_003


@dataclass
class ExperimentConfig:
    prior: PriorConfig = field(default_factory=PriorConfig)
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)
    k: int | None = None
    gamma: float | None = None
    corrected: str = "both"
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if self.k is not None and self.gamma is not None:
            raise ValueError("choose either k or gamma, not both")
        if self.k is not None and (int(self.k) != self.k or self.k < 1):
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.corrected not in CORRECTED_MODES:
            raise ValueError(f"corrected must be one of {CORRECTED_MODES}")
        if self.n_jobs < 1:
            raise ValueError("n_jobs must be at least 1")

    @property
    def flags(self):
        return {"both": (True, False), "on": (True,), "off": (False,)}[self.corrected]

    def select(self, dataset: BinaryDataset, seed):
        if self.gamma is not None:
            return select_by_threshold(dataset, self.gamma)
        if self.k is not None:
            return select_top_k(dataset, min(self.k, dataset.p), seed)
        raise ValueError("config needs k or gamma for selection")

    def to_dict(self):
        d = asdict(self)
        d["prior"] = asdict(self.prior)
        d["quad"] = asdict(self.quad)
        return d


def derived_seed(seed, *key) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=tuple(key)).generate_state(1)[0])


def _map(fn, items, n_jobs):
    if n_jobs == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(fn, items))


def fit_grid(train: BinaryDataset, selection, config: ExperimentConfig, corrected=True):
    """AlphaGrid for the selected columns; the adjustment only when asked for."""
    summary = summarize(train).restrict(selection.columns)
    omitted = selection.omitted_count if corrected else 0
    return build_alpha_grid(summary, config.prior, config.quad, labels=train.labels,
                            gamma=selection.gamma, omitted_count=omitted)


def _loocv_fold(dataset, config, i):
    keep = np.ones(dataset.n, dtype=bool)
    keep[i] = False
    train = dataset.subset_cases(keep)
    record = {"case": i, "label": int(dataset.labels[i])}
    if train.labels.min() == train.labels.max():
        record["skipped"] = "remaining labels are all one class"
        return record
    seed = derived_seed(config.seed, i)
    sel = config.select(train, seed)
    grid = fit_grid(train, sel, config, corrected=True in config.flags)
    x = dataset.features[i, sel.columns]
    record.update(seed=seed, gamma=sel.gamma, selected=list(sel.feature_ids))
    for flag in config.flags:
        key = "p1_corrected" if flag else "p1_uncorrected"
        record[key] = float(predict_proba_from_grid(grid, x, flag)[0])
    return record


def loocv(dataset: BinaryDataset, config: ExperimentConfig) -> dict:
    """Leave-one-out predictions with selection redone inside every fold.

    Returns a report with one record per case; folds whose remaining labels
    are a single class are recorded as skipped.
    """
    if dataset.n < 2:
        raise ValueError("leave-one-out needs at least two cases")
    records = _map(lambda i: _loocv_fold(dataset, config, i), range(dataset.n), config.n_jobs)
    report = {"n": dataset.n, "p": dataset.p, "config": config.to_dict(), "cases": records,
              "skipped": [r["case"] for r in records if "skipped" in r]}
    done = [r for r in records if "skipped" not in r]
    labels = np.array([r["label"] for r in done])
    for flag in config.flags:
        key = "p1_corrected" if flag else "p1_uncorrected"
        name = "corrected" if flag else "uncorrected"
        if done:
            report[name] = MetricsReport.compute([r[key] for r in done], labels).to_dict()
    return report


def partitioned_loocv(values, labels, feature_ids, config: ExperimentConfig, groups=10) -> dict:
    """Median-binarize, split features into groups, and run :func:`loocv` on each."""
    binary = binarize_by_median(values, labels, feature_ids)
    parts = partition_features(binary, groups, derived_seed(config.seed, _PARTITION_KEY))
    reports = [loocv(part, config) for part in parts]
    out = {"groups": reports, "binarize_rule": MEDIAN_TIE_RULE, "config": config.to_dict()}
    for flag in config.flags:
        name = "corrected" if flag else "uncorrected"
        key = "p1_" + name
        p = [r[key] for rep in reports for r in rep["cases"] if key in r]
        y = [r["label"] for rep in reports for r in rep["cases"] if key in r]
        if p:
            out[name] = MetricsReport.compute(p, y).to_dict()
    return out


def _method_report(p, labels):
    return {"metrics": MetricsReport.compute(p, labels).to_dict(),
            "calibration": calibration_table(p, labels).to_dicts()}


def run_simulation_study(spec: SyntheticSpec, subset_sizes, config: ExperimentConfig,
                         include_all: bool = True, return_predictions: bool = False):
    """Simulate, screen at each subset size, and score the test set both ways.

    Returns ``(report, timings)``. Timings are kept apart from the report so
    that the report is a deterministic function of its inputs.
    """
    train, test, latent = simulate(spec)
    train_cor = np.abs(feature_correlations(train.features, train.labels))
    test_cor = np.abs(feature_correlations(test.features, test.labels))
    report = {"spec": asdict(spec), "config": config.to_dict(), "subsets": [],
              "alpha_nodes": inverse_gamma_quantile_nodes(config.prior.a, config.prior.b,
                                                          config.quad.alpha_nodes)}
    timings = {"subsets": []}
    predictions = {}

    def one(k):
        sel = select_top_k(train, k, derived_seed(spec.seed, k))
        t0 = time.perf_counter()
        grid = fit_grid(train, sel, config, corrected=False)
        p_unc = predict_proba_from_grid(grid, test.features[:, sel.columns], False)
        t_unc = time.perf_counter() - t0
        t0 = time.perf_counter()
        adj = build_adjustment_cache(train.labels, sel.gamma, grid.nodes, sel.omitted_count, config.quad)
        t_adj = time.perf_counter() - t0
        cgrid = replace(grid, log_adjustment=adj.log_factor)
        p_cor = predict_proba_from_grid(cgrid, test.features[:, sel.columns], True)
        la, dens_c = posterior_alpha_from_grid(cgrid, True)
        _, dens_u = posterior_alpha_from_grid(grid, False)
        entry = {
            "k": k, "gamma": sel.gamma, "selected": list(sel.feature_ids),
            "corrected": _method_report(p_cor, test.labels),
            "uncorrected": _method_report(p_unc, test.labels),
            "posterior_log_alpha": {"log_alpha": la, "corrected": dens_c, "uncorrected": dens_u},
        }
        return entry, {"k": k, "uncorrected_s": t_unc, "corrected_s": t_unc + t_adj,
                       "adjustment_s": t_adj}, (p_cor, p_unc)

    for entry, tim, preds in _map(one, list(subset_sizes), config.n_jobs):
        report["subsets"].append(entry)
        timings["subsets"].append(tim)
        predictions[entry["k"]] = preds

    if include_all:
        t0 = time.perf_counter()
        all_sel = select_top_k(train, train.p, 0)
        grid = fit_grid(train, all_sel, config, corrected=False)
        p_all = predict_proba_from_grid(grid, test.features[:, all_sel.columns], False)
        timings["all_s"] = time.perf_counter() - t0
        la, dens = posterior_alpha_from_grid(grid, False)
        report["all_features"] = {**_method_report(p_all, test.labels),
                                  "posterior_log_alpha": {"log_alpha": la, "density": dens}}
        predictions["all"] = p_all
    report["correlations"] = {"train": train_cor, "test": test_cor}
    if return_predictions:
        return report, timings, predictions
    return report, timings
