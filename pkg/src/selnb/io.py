"""Delimited data files, key=value config files and JSON reports.

Data files have a header row of column names; one column holds the 0/1
labels and every other column is a feature, named by its header.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


def _delimiter(path):
    return "," if str(path).endswith(".csv") else "\t"


def read_table(path, label_column="label"):
    """Return ``(values, labels, feature_ids)`` from a delimited file."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh, delimiter=_delimiter(path)))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header, body = rows[0], [r for r in rows[1:] if r]
    if label_column not in header:
        raise ValueError(f"{path}: no label column {label_column!r}")
    li = header.index(label_column)
    ids = tuple(h for i, h in enumerate(header) if i != li)
    try:
        data = np.array([[float(v) for v in r] for r in body], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from None
    if data.ndim != 2 or data.shape[1] != len(header):
        raise ValueError(f"{path}: ragged rows")
    labels = data[:, li]
    if not np.isin(labels, (0, 1)).all():
        raise ValueError(f"{path}: labels must be 0 or 1")
    values = np.delete(data, li, axis=1)
    return values, labels.astype(np.int8), ids


def read_binary_dataset(path, label_column="label"):
    from .counts import BinaryDataset

    values, labels, ids = read_table(path, label_column)
    return BinaryDataset(values, labels, ids)


def write_table(path, values, labels, feature_ids, label_column="label", fmt=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = np.asarray(values)
    if fmt is None:
        fmt = "{:d}" if np.issubdtype(values.dtype, np.integer) else "{!r}"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, delimiter=_delimiter(path), lineterminator="\n")
        w.writerow([label_column, *feature_ids])
        for lab, row in zip(labels, values):
            w.writerow([int(lab), *(fmt.format(v.item()) for v in row)])


def write_dataset(path, dataset, label_column="label"):
    write_table(path, dataset.features, dataset.labels, dataset.feature_ids, label_column)


def read_config(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment. Keys use underscores."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_json(path, report):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(report), indent=2, sort_keys=True) + "\n")


def write_columns(path, columns: dict):
    """Write equal-length columns as a tab-separated table."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(names)
        for row in zip(*(columns[n] for n in names)):
            w.writerow([repr(v.item()) if isinstance(v, np.generic) else v for v in row])
