"""CSV and SVG artifacts for experiment results."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from ..errors import ParameterError

__all__ = [
    "RESULT_HEADER",
    "PLACEMENT_HEADER",
    "export",
    "write_results_csv",
    "read_results_csv",
    "write_placement_csv",
    "read_placement_csv",
    "plot_summary_svg",
    "plot_placement_svg",
]

RESULT_HEADER = ["scheme", "sweep_param", "sweep_value", "seed", "sigma", "runtime_s"]
PLACEMENT_HEADER = ["row", "node_class", "node_index", "capacity", "content", "eta"]


def _fmt(value):
    if value == "" or value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)


def write_results_csv(result, path, runtime=True):
    """One row per (scheme, sweep point, seed).

    With ``runtime=False`` the timing column is left empty so that equal
    specs give byte-identical files.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_HEADER)
        for rec in result.records:
            writer.writerow([
                rec.scheme, rec.sweep_param, _fmt(rec.sweep_value), rec.seed,
                _fmt(rec.sigma), _fmt(rec.runtime_s) if runtime else "",
            ])
    return path


def read_results_csv(path):
    """Rows of a results file as dicts with numeric fields converted."""
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != RESULT_HEADER:
            raise ParameterError(f"{path}: header {reader.fieldnames} != {RESULT_HEADER}")
        rows = []
        for row in reader:
            row["seed"] = int(row["seed"])
            row["sigma"] = float(row["sigma"])
            row["runtime_s"] = float(row["runtime_s"]) if row["runtime_s"] else math.nan
            if row["sweep_value"] != "":
                v = float(row["sweep_value"])
                row["sweep_value"] = int(v) if row["sweep_param"] != "alpha" and v.is_integer() else v
            rows.append(row)
    return rows


def write_placement_csv(placement, topology, path):
    """Long-format dump of a placement: one row per (node, content)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    classes = topology.node_class()
    offsets = {"user": 0, "sbs": topology.n_users, "mbs": topology.n_users + topology.n_sbs}
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PLACEMENT_HEADER)
        for j, row in enumerate(placement.eta):
            for k, value in enumerate(row):
                writer.writerow([j, classes[j], j - offsets[classes[j]],
                                 _fmt(placement.capacities[j]), k, repr(float(value))])
    return path


def read_placement_csv(path):
    """Return ``(eta, capacities, node_class)`` from a placement file."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    n_rows = 1 + max(int(r["row"]) for r in rows)
    F = 1 + max(int(r["content"]) for r in rows)
    eta = np.zeros((n_rows, F))
    caps = np.zeros(n_rows)
    classes = np.empty(n_rows, dtype=object)
    for r in rows:
        j, k = int(r["row"]), int(r["content"])
        eta[j, k] = float(r["eta"])
        caps[j] = float(r["capacity"])
        classes[j] = r["node_class"]
    return eta, caps, classes


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    # fixed ids and no timestamp keep the SVG bytes reproducible
    matplotlib.rcParams["svg.hashsalt"] = "edgecache"
    return plt


def _save_svg(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    return path


def _summaries(rows):
    groups = {}
    for r in rows:
        if not math.isnan(r["sigma"]):
            groups.setdefault((r["scheme"], r["sweep_value"]), []).append(r["sigma"])
    stats = {}
    for key, vals in groups.items():
        arr = np.asarray(vals)
        stats[key] = (arr.mean(), arr.std(ddof=1) if arr.size > 1 else 0.0)
    return stats


def _as_rows(result):
    if isinstance(result, list):
        return result
    return [
        {"scheme": r.scheme, "sweep_param": r.sweep_param, "sweep_value": r.sweep_value,
         "seed": r.seed, "sigma": r.sigma, "runtime_s": r.runtime_s}
        for r in result.records
    ]


def plot_summary_svg(result, path, title=None):
    """Bars with standard-deviation whiskers, or lines against the swept value."""
    plt = _pyplot()
    rows = _as_rows(result)
    stats = _summaries(rows)
    schemes = list(dict.fromkeys(r["scheme"] for r in rows))
    params = {r["sweep_param"] for r in rows}
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    if params == {""}:
        means = [stats.get((s, ""), (np.nan, 0))[0] for s in schemes]
        errs = [stats.get((s, ""), (np.nan, 0))[1] for s in schemes]
        ax.bar(schemes, means, yerr=errs, capsize=6, color=["C0", "C1", "C2"][: len(schemes)])
        ax.set_xlabel("scheme")
    else:
        param = next(iter(params - {""}))
        for s in schemes:
            xs = sorted({r["sweep_value"] for r in rows if r["scheme"] == s})
            ys = [stats.get((s, x), (np.nan, 0))[0] for x in xs]
            es = [stats.get((s, x), (np.nan, 0))[1] for x in xs]
            ax.errorbar(xs, ys, yerr=es, marker="o", capsize=4, label=s)
        ax.set_xlabel(param)
        ax.legend()
    ax.set_ylabel("average cache hit ratio")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3)
    out = _save_svg(fig, path)
    plt.close(fig)
    return out


def plot_placement_svg(eta, capacities, classes, path, per_class=2):
    """Grouped bars of caching probability per content for the first nodes of each class."""
    plt = _pyplot()
    classes = np.asarray(classes)
    picks = []
    for cls in ("user", "sbs", "mbs"):
        rows = np.flatnonzero(classes == cls)[:per_class]
        picks += [(cls, i, int(j)) for i, j in enumerate(rows)]
    fig, axes = plt.subplots(len(picks), 1, figsize=(7.0, 1.6 * max(len(picks), 1)), sharex=True,
                             squeeze=False)
    F = eta.shape[1]
    for ax, (cls, i, j) in zip(axes[:, 0], picks):
        ax.bar(np.arange(1, F + 1), eta[j], color={"user": "C0", "sbs": "C1", "mbs": "C2"}[cls])
        ax.set_ylim(0, 1.05)
        ax.set_ylabel(f"{cls} {i + 1}\nC={capacities[j]:g}", fontsize=8)
    axes[-1, 0].set_xlabel("content")
    out = _save_svg(fig, path)
    plt.close(fig)
    return out


def export(result, format, path, runtime=True):
    """Write ``result`` as ``csv`` or ``svg`` (summary plot) to ``path``."""
    if format == "csv":
        return write_results_csv(result, path, runtime=runtime)
    if format == "svg":
        return plot_summary_svg(result, path, title=getattr(result, "name", None))
    raise ParameterError(f"unknown export format {format!r}; use 'csv' or 'svg'")
