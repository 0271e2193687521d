"""CSV ingestion, model files and study tables."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .core import ClusterState, FitResult, Hyperparams, WMCENError

SCHEMA_VERSION = 1
STUDY_COLUMNS = ("method", "p", "eta", "xi", "error", "rep", "seed", "lambda", "gamma", "k",
                 "median_ape", "mse_beta", "converged", "failure")


class ParseError(WMCENError, ValueError):
    pass


def load_csv(path, has_header=False, delimiter=","):
    """Read a rectangular numeric table. Errors name the 1-based line number."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    rows = []
    width = None
    skip_header = has_header
    for lineno, row in enumerate(csv.reader(text.splitlines(), delimiter=delimiter), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if width is None:
            width = len(row)
        if skip_header:
            skip_header = False
            continue
        if len(row) != width:
            raise ParseError(f"{path}: line {lineno} has {len(row)} fields, expected {width}")
        try:
            rows.append([float(c) for c in row])
        except ValueError:
            col = next(i for i, c in enumerate(row) if not _is_float(c))
            raise ParseError(
                f"{path}: non-numeric value {row[col]!r} at line {lineno}, column {col + 1}"
            ) from None
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def _is_float(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def save_csv(path, a, delimiter=","):
    a = np.atleast_2d(np.asarray(a, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        for row in a:
            w.writerow([repr(float(v)) for v in row])


def model_to_dict(res: FitResult):
    hp = res.hyperparams
    return {
        "schema_version": SCHEMA_VERSION,
        "p": int(res.b.shape[0]),
        "q": int(res.b.shape[1]),
        "k": int(res.clusters.k),
        "coefficients": res.b.tolist(),
        "intercepts": res.intercepts.tolist(),
        "cluster_labels": res.clusters.labels.tolist(),
        "centroids": res.clusters.v.tolist(),
        "hyperparams": None if hp is None else {
            "lambda": hp.lam, "gamma": hp.gamma, "k": hp.k, "epsilon": hp.epsilon},
        "fit": {
            "inner_iters": res.inner_iters,
            "outer_iters": res.outer_iters,
            "converged": res.converged,
            "objective": res.objective,
            "objective_trace": res.objective_trace.tolist(),
            "rejected_sweeps": res.rejected_sweeps,
        },
    }


def model_from_dict(doc):
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ParseError(f"unsupported model schema version {doc.get('schema_version')!r}")
    b = np.array(doc["coefficients"], dtype=float).reshape(doc["p"], doc["q"])
    cs = ClusterState.from_labels(doc["cluster_labels"],
                                  np.array(doc["centroids"], dtype=float).reshape(doc["p"], doc["k"]))
    h = doc.get("hyperparams")
    hp = None if h is None else Hyperparams(h["lambda"], h["gamma"], h["k"], h["epsilon"])
    f = doc["fit"]
    return FitResult(b=b, clusters=cs, objective_trace=np.array(f["objective_trace"]),
                     inner_iters=f["inner_iters"], outer_iters=f["outer_iters"],
                     converged=f["converged"], intercepts=np.array(doc["intercepts"]),
                     hyperparams=hp, rejected_sweeps=f.get("rejected_sweeps", 0))


def save_model(path, res: FitResult):
    # json writes floats with repr(), which round-trips float64 exactly
    Path(path).write_text(json.dumps(model_to_dict(res), indent=1) + "\n")


def load_model(path):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read model file {path}: {exc}") from exc
    return model_from_dict(doc)


def _fmt(v):
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def study_rows(result):
    spec = result.spec
    for r in result.per_rep:
        yield {
            "method": result.method, "p": spec.p, "eta": float(spec.eta), "xi": float(spec.xi),
            "error": spec.error_index, "rep": r.rep, "seed": spec.seed,
            "lambda": float(r.lam), "gamma": float(r.gamma), "k": r.k,
            "median_ape": float(r.median_ape), "mse_beta": float(r.mse_beta),
            "converged": bool(r.converged), "failure": r.error.replace(",", ";"),
        }


def write_study_table(path, results, delimiter=","):
    """One row per replication; several studies may share a file."""
    if not isinstance(results, (list, tuple)):
        results = [results]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(STUDY_COLUMNS)
        for res in results:
            for row in study_rows(res):
                w.writerow([_fmt(row[c]) for c in STUDY_COLUMNS])


def read_study_table(path, delimiter=","):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        missing = set(STUDY_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ParseError(f"{path}: missing columns {sorted(missing)}")
        return list(reader)


def format_cell(mean, sd, digits=3):
    """Render a metric as ``mean (sd)``."""
    if sd < 10 ** -digits and sd > 0:
        return f"{mean:.{digits}f} (<{10 ** -digits:.{digits}f})"
    return f"{mean:.{digits}f} ({sd:.{digits}f})"


def summarize_table(rows):
    """Group study rows by (method, p, error, eta, xi); mean and sd over
    successful replications, in the report's ``mean (sd)`` form."""
    groups = {}
    for row in rows:
        key = (row["method"], int(row["p"]), int(row["error"]), float(row["eta"]), float(row["xi"]))
        groups.setdefault(key, []).append(row)
    out = []
    for key in sorted(groups):
        ok = [r for r in groups[key] if not r["failure"]]
        entry = dict(zip(("method", "p", "error", "eta", "xi"), key))
        entry["n_ok"] = len(ok)
        entry["n_failed"] = len(groups[key]) - len(ok)
        for metric in ("median_ape", "mse_beta"):
            vals = np.array([float(r[metric]) for r in ok])
            if vals.size:
                sd = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
                entry[metric] = (float(vals.mean()), sd)
            else:
                entry[metric] = (math.nan, math.nan)
        out.append(entry)
    return out


def render_report(rows):
    lines = ["method  p    error  eta   xi    median APE (sd)   MSE beta (sd)    reps"]
    for e in summarize_table(rows):
        lines.append(
            f"{e['method']:<7} {e['p']:<4} {e['error']:<6} {e['eta']:<5.2f} {e['xi']:<5.2f} "
            f"{format_cell(*e['median_ape']):<17} {format_cell(*e['mse_beta']):<16} "
            f"{e['n_ok']}" + (f" ({e['n_failed']} failed)" if e["n_failed"] else ""))
    lines.append("aggregation: mean and sd across replications")
    return "\n".join(lines)


def plot_metric_distributions(rows, out_prefix):
    """Box plots of per-replication metrics, one PNG per metric."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    groups = {}
    for row in rows:
        if row["failure"]:
            continue
        label = f"{row['method']} E{row['error']} p={row['p']}\neta={float(row['eta']):g} xi={float(row['xi']):g}"
        groups.setdefault(label, []).append(row)
    paths = []
    for metric, title in (("median_ape", "median APE"), ("mse_beta", "MSE of beta")):
        fig, ax = plt.subplots(figsize=(max(4, 1.6 * len(groups)), 4))
        labels = sorted(groups)
        ax.boxplot([[float(r[metric]) for r in groups[g]] for g in labels])
        ax.set_xticks(range(1, len(labels) + 1), labels, fontsize=7)
        ax.set_ylabel(title)
        fig.tight_layout()
        path = f"{out_prefix}_{metric}.png"
        fig.savefig(path, dpi=100)
        plt.close(fig)
        paths.append(path)
    return paths

