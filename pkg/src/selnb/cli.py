"""Command-line entry point: ``selnb <subcommand> [options]``.

Every option may also come from a ``--config`` file of ``key = value``
lines (keys are option names without the leading dashes); command-line
flags override the file.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .datagen import SyntheticSpec, colon_standin, simulate
from .experiments import ExperimentConfig, fit_grid, loocv, partitioned_loocv, run_simulation_study
from .metrics import MetricsReport, calibration_table
from .model import PriorConfig, posterior_alpha_from_grid, predict_proba_from_grid
from .numerics import QuadratureSpec
from .preprocessing import MEDIAN_TIE_RULE, binarize_by_median, partition_features


def _int_list(text):
    return [int(v) for v in str(text).split(",") if v.strip()]


def _bool(text):
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# name -> (type, default); shared by flags and config files
OPTIONS = {
    "seed": (int, 0),
    "k": (int, None),
    "gamma": (float, None),
    "alpha_nodes": (int, 30),
    "theta_nodes": (int, 21),
    "prior": (str, "1,1,0.5,5"),
    "corrected": (str, "both"),
    "n_jobs": (int, 1),
    "label_column": (str, "label"),
    "input": (str, None),
    "output": (str, None),
    "train": (str, None),
    "test": (str, None),
    "out_dir": (str, "."),
    "groups": (int, 10),
    "alpha_true": (float, 300.0),
    "p": (int, 10000),
    "n_train": (int, 200),
    "n_test": (int, 2000),
    "balanced": (_bool, True),
    "subset_sizes": (_int_list, [1, 10, 100, 1000]),
    "include_all": (_bool, True),
    "binarize": (_bool, False),
    "standin": (_bool, False),
}


def _add_common(parser):
    parser.add_argument("--config", help="key=value file; flags override it")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--k", type=int, help="number of features to keep")
    parser.add_argument("--gamma", type=float, help="keep features with |COR| > gamma")
    parser.add_argument("--alpha-nodes", type=int, help="K, midpoint nodes for alpha")
    parser.add_argument("--theta-nodes", type=int, help="M, odd Simpson nodes for theta")
    parser.add_argument("--prior", help="f0,f1,a,b")
    parser.add_argument("--corrected", choices=("both", "on", "off"))
    parser.add_argument("--n-jobs", type=int)
    parser.add_argument("--label-column")


def build_parser():
    parser = argparse.ArgumentParser(prog="selnb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw train/test sets from the naive Bayes model")
    _add_common(p)
    p.add_argument("--alpha-true", type=float)
    p.add_argument("--p", type=int)
    p.add_argument("--n-train", type=int)
    p.add_argument("--n-test", type=int)
    p.add_argument("--balanced", type=_bool)
    p.add_argument("--standin", action="store_true", default=None,
                   help="write a real-valued 62x2000 two-class stand-in instead")
    p.add_argument("--out-dir")

    p = sub.add_parser("binarize", help="threshold each feature at its median")
    _add_common(p)
    p.add_argument("--input")
    p.add_argument("--output")

    p = sub.add_parser("partition", help="split features into equal random groups")
    _add_common(p)
    p.add_argument("--input")
    p.add_argument("--groups", type=int)
    p.add_argument("--out-dir")

    p = sub.add_parser("select", help="screen features by |correlation|")
    _add_common(p)
    p.add_argument("--input")
    p.add_argument("--output")

    p = sub.add_parser("predict", help="fit on --train and predict --test")
    _add_common(p)
    p.add_argument("--train")
    p.add_argument("--test")
    p.add_argument("--output", help="predictions table")
    p.add_argument("--out-dir")

    p = sub.add_parser("loocv", help="leave-one-out study with per-fold selection")
    _add_common(p)
    p.add_argument("--input")
    p.add_argument("--binarize", action="store_true", default=None,
                   help="input is real-valued: binarize, partition into --groups, run each")
    p.add_argument("--groups", type=int)
    p.add_argument("--standin", action="store_true", default=None,
                   help="use the synthetic 62x2000 stand-in instead of --input")
    p.add_argument("--out-dir")

    p = sub.add_parser("study", help="simulation study over several subset sizes")
    _add_common(p)
    p.add_argument("--alpha-true", type=float)
    p.add_argument("--p", type=int)
    p.add_argument("--n-train", type=int)
    p.add_argument("--n-test", type=int)
    p.add_argument("--subset-sizes", type=_int_list)
    p.add_argument("--include-all", type=_bool)
    p.add_argument("--out-dir")

    p = sub.add_parser("posterior-alpha", help="posterior density of log(alpha) at the grid")
    _add_common(p)
    p.add_argument("--input")
    p.add_argument("--output")
    return parser


def resolve_settings(args) -> dict:
    """Defaults, then the config file, then explicit flags."""
    settings = {name: default for name, (_, default) in OPTIONS.items()}
    if getattr(args, "config", None):
        for key, value in io.read_config(args.config).items():
            if key not in OPTIONS:
                raise ValueError(f"unknown config key {key!r}")
            settings[key] = OPTIONS[key][0](value)
    for key, value in vars(args).items():
        if key in OPTIONS and value is not None:
            settings[key] = value
    return settings


def experiment_config(s) -> ExperimentConfig:
    return ExperimentConfig(prior=PriorConfig.from_string(s["prior"]),
                            quad=QuadratureSpec(s["alpha_nodes"], s["theta_nodes"]),
                            k=s["k"], gamma=s["gamma"], corrected=s["corrected"],
                            seed=s["seed"], n_jobs=s["n_jobs"])


def _need(s, *names):
    for name in names:
        if s[name] is None:
            raise ValueError(f"--{name.replace('_', '-')} is required")


def cmd_simulate(s):
    out = Path(s["out_dir"])
    if s["standin"]:
        values, labels, ids = colon_standin(seed=s["seed"])
        io.write_table(out / "standin.tsv", values, labels, ids, s["label_column"])
        return
    spec = SyntheticSpec(s["alpha_true"], s["p"], s["n_train"], s["n_test"], s["balanced"], s["seed"])
    train, test, latent = simulate(spec)
    io.write_dataset(out / "train.tsv", train, s["label_column"])
    io.write_dataset(out / "test.tsv", test, s["label_column"])
    io.write_columns(out / "latent.tsv", {"feature": train.feature_ids, "theta": latent.theta,
                                          "phi0": latent.phi0, "phi1": latent.phi1})


def cmd_binarize(s):
    _need(s, "input", "output")
    values, labels, ids = io.read_table(s["input"], s["label_column"])
    io.write_dataset(s["output"], binarize_by_median(values, labels, ids), s["label_column"])


def cmd_partition(s):
    _need(s, "input")
    data = io.read_binary_dataset(s["input"], s["label_column"])
    out = Path(s["out_dir"])
    for g, part in enumerate(partition_features(data, s["groups"], s["seed"])):
        io.write_dataset(out / f"group{g:02d}.tsv", part, s["label_column"])


def _selection_report(sel):
    return {"k": sel.k, "p": sel.p, "gamma": sel.gamma,
            "retained": [{"feature": f, "abs_cor": c} for f, c in zip(sel.feature_ids, sel.correlations)]}


def cmd_select(s):
    _need(s, "input")
    data = io.read_binary_dataset(s["input"], s["label_column"])
    sel = experiment_config(s).select(data, s["seed"])
    report = _selection_report(sel)
    if s["output"]:
        io.write_json(s["output"], report)
    else:
        print(json.dumps(io._jsonable(report), indent=2, sort_keys=True))


def _read_test(path, label_column, feature_ids):
    """Test features aligned to ``feature_ids``; labels may be absent."""
    path = Path(path)
    delim = "," if path.suffix == ".csv" else "\t"
    with path.open(newline="") as fh:
        header = next(csv.reader(fh, delimiter=delim))
    if label_column in header:
        values, labels, ids = io.read_table(path, label_column)
    else:
        data = np.loadtxt(path, delimiter=delim, skiprows=1, ndmin=2)
        values, labels, ids = data, None, tuple(header)
    pos = {f: i for i, f in enumerate(ids)}
    missing = [f for f in feature_ids if f not in pos]
    if missing:
        raise ValueError(f"test file lacks features {missing[:5]}")
    return values[:, [pos[f] for f in feature_ids]], labels


def cmd_predict(s):
    _need(s, "train", "test")
    cfg = experiment_config(s)
    train = io.read_binary_dataset(s["train"], s["label_column"])
    if cfg.k is None and cfg.gamma is None:
        cfg.k = train.p
    sel = cfg.select(train, s["seed"])
    X, labels = _read_test(s["test"], s["label_column"], sel.feature_ids)
    grid = fit_grid(train, sel, cfg, corrected=True in cfg.flags)
    cols = {"case": np.arange(X.shape[0])}
    report = {"selection": _selection_report(sel), "config": cfg.to_dict()}
    for flag in cfg.flags:
        name = "corrected" if flag else "uncorrected"
        p1 = predict_proba_from_grid(grid, X, flag)
        cols["p1_" + name] = p1
        if labels is not None:
            report[name] = {"metrics": MetricsReport.compute(p1, labels).to_dict(),
                            "calibration": calibration_table(p1, labels).to_dicts()}
    if labels is not None:
        cols["label"] = labels
    out = Path(s["out_dir"])
    io.write_columns(s["output"] or out / "predictions.tsv", cols)
    io.write_json(out / "predict_report.json", report)


def cmd_loocv(s):
    cfg = experiment_config(s)
    if cfg.k is None and cfg.gamma is None:
        cfg.k = 5
    out = Path(s["out_dir"])
    if s["standin"] or s["binarize"]:
        if s["standin"]:
            values, labels, ids = colon_standin(seed=s["seed"])
        else:
            _need(s, "input")
            values, labels, ids = io.read_table(s["input"], s["label_column"])
        report = partitioned_loocv(values, labels, ids, cfg, s["groups"])
        cases = [dict(r, group=g) for g, rep in enumerate(report["groups"]) for r in rep["cases"]]
    else:
        _need(s, "input")
        data = io.read_binary_dataset(s["input"], s["label_column"])
        report = loocv(data, cfg)
        report["binarize_rule"] = MEDIAN_TIE_RULE
        cases = [dict(r, group=0) for r in report["cases"]]
    io.write_json(out / "loocv_report.json", report)
    cols = {"group": [c["group"] for c in cases], "case": [c["case"] for c in cases],
            "label": [c["label"] for c in cases],
            "gamma": [c.get("gamma", "") for c in cases],
            "seed": [c.get("seed", "") for c in cases]}
    for flag in cfg.flags:
        key = "p1_corrected" if flag else "p1_uncorrected"
        cols[key] = [c.get(key, "") for c in cases]
    io.write_columns(out / "loocv_predictions.tsv", cols)
    for name in ("uncorrected", "corrected"):
        if name in report:
            print(f"{name}: error rate {report[name]['error_rate']:.3f}, "
                  f"expected {report[name]['expected_error_rate']:.3f}")


def cmd_study(s):
    cfg = experiment_config(s)
    spec = SyntheticSpec(s["alpha_true"], s["p"], s["n_train"], s["n_test"], s["balanced"], s["seed"])
    report, timings = run_simulation_study(spec, s["subset_sizes"], cfg, include_all=s["include_all"])
    out = Path(s["out_dir"])
    io.write_json(out / "study.json", report)
    io.write_json(out / "timings.json", timings)
    io.write_columns(out / "correlations.tsv", report["correlations"])
    for entry in report["subsets"]:
        k = entry["k"]
        for name in ("corrected", "uncorrected"):
            rows = entry[name]["calibration"]
            io.write_columns(out / f"calibration_k{k}_{name}.tsv",
                             {key: [r[key] if r[key] is not None else "" for r in rows]
                              for key in ("lower", "upper", "count", "pred", "actual")})
        io.write_columns(out / f"posterior_alpha_k{k}.tsv", entry["posterior_log_alpha"])
    for entry in report["subsets"]:
        c, u = entry["corrected"]["metrics"], entry["uncorrected"]["metrics"]
        print(f"k={entry['k']:>5} gamma={entry['gamma']:.3f}  "
              f"corrected err {c['error_rate']:.3f}/{c['expected_error_rate']:.3f}  "
              f"uncorrected err {u['error_rate']:.3f}/{u['expected_error_rate']:.3f}")


def cmd_posterior_alpha(s):
    _need(s, "input")
    cfg = experiment_config(s)
    data = io.read_binary_dataset(s["input"], s["label_column"])
    if cfg.k is None and cfg.gamma is None:
        cfg.k = data.p
    sel = cfg.select(data, s["seed"])
    grid = fit_grid(data, sel, cfg, corrected=True)
    la, dc = posterior_alpha_from_grid(grid, True)
    _, du = posterior_alpha_from_grid(grid, False)
    cols = {"log_alpha": la, "corrected": dc, "uncorrected": du}
    out = s["output"] or Path(s["out_dir"]) / "posterior_alpha.tsv"
    io.write_columns(out, cols)


COMMANDS = {
    "simulate": cmd_simulate,
    "binarize": cmd_binarize,
    "partition": cmd_partition,
    "select": cmd_select,
    "predict": cmd_predict,
    "loocv": cmd_loocv,
    "study": cmd_study,
    "posterior-alpha": cmd_posterior_alpha,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = resolve_settings(args)
        experiment_config(settings)  # validate shared settings before doing any work
        COMMANDS[args.command](settings)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
