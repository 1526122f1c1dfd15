"""Metrics files and the results table."""

import json
import os

from .errors import DataError

METRICS_SCHEMA_VERSION = 1
METRIC_KEYS = ("method", "dataset", "mse_ind", "mse_oos", "params_count", "wallclock_s")

# row order and display names
METHODS = [
    ("mlp", "Standard MLP"),
    ("gp", "Gaussian Process"),
    ("engression", "Engression"),
    ("weightcaster", "WeightCaster"),
]
DATASETS = ("cosine", "airquality")

# Published figures for the one method this package does not run.
LITERATURE = {
    "engression": {"cosine": (0.50802, 1.3240), "airquality": (0.3240, 0.1603)},
}


def make_metrics(method, dataset, mse_ind, mse_oos, params_count, wallclock_s, **extra):
    d = {
        "schema_version": METRICS_SCHEMA_VERSION,
        "method": method,
        "dataset": dataset,
        "mse_ind": float(mse_ind),
        "mse_oos": float(mse_oos),
        "params_count": int(params_count),
        "wallclock_s": float(wallclock_s),
    }
    d.update(extra)
    return d


def write_metrics(metrics, path):
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(metrics, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_metrics(path):
    try:
        with open(path) as fh:
            d = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"metrics file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None
    missing = [k for k in METRIC_KEYS if k not in d]
    if missing:
        raise DataError(f"{path}: missing metric keys {missing}")
    return d


def collect(metrics_list):
    """``{(method, dataset): (ind, oos)}``; conflicting duplicates are an error."""
    table = {}
    for m in metrics_list:
        key = (m["method"], m["dataset"])
        val = (m["mse_ind"], m["mse_oos"])
        if key in table and table[key] != val:
            raise DataError(f"conflicting entries for method={key[0]!r} dataset={key[1]!r}")
        table[key] = val
    return table


def _fmt(v):
    return "–" if v is None else f"{v:.5f}" if v < 0.01 else f"{v:.4f}"


def render_table(metrics_list):
    """Markdown table: one row per measured method plus the literature-only row."""
    table = collect(metrics_list)
    known = {k for k, _ in METHODS}
    extra = sorted({m for m, _ in table} - known)
    lines = [
        "| Method | Cosine (InD) | Cosine (OoS) | AirQuality (InD) | AirQuality (OoS) |",
        "|---|---|---|---|---|",
    ]
    for key, label in METHODS + [(m, m) for m in extra]:
        lit = key in LITERATURE
        if not lit and not any((key, ds) in table for ds in DATASETS):
            continue
        cells = []
        for ds in DATASETS:
            pair = LITERATURE[key][ds] if lit else table.get((key, ds), (None, None))
            cells.extend(_fmt(v) for v in pair)
        name = f"{label} (literature)" if lit else label
        lines.append(f"| {name} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"
