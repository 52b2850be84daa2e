"""Jaccard scoring of flow label maps and per-stage timing tables."""

from __future__ import annotations

import csv
import io

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DimensionMismatch

EVAL_COLUMNS = ("sequence", "jaccard", "n_flows_pred", "n_flows_gt", "time_total_s")
TIMING_STAGES = ("coarse", "fine", "merge", "total")


def _check_pair(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"label maps differ in shape: {a.shape} vs {b.shape}")
    if (a.size and a.min() < 0) or (b.size and b.min() < 0):
        raise ValueError("label maps must be non-negative")
    return a.ravel(), b.ravel()


def overlap_matrix(a, b):
    """Counts of co-occurring non-zero labels: rows are labels of ``a``, columns of ``b``."""
    a, b = _check_pair(a, b)
    la = np.unique(a[a > 0])
    lb = np.unique(b[b > 0])
    both = (a > 0) & (b > 0)
    ia = np.searchsorted(la, a[both])
    ib = np.searchsorted(lb, b[both])
    counts = np.zeros((len(la), len(lb)), dtype=np.int64)
    np.add.at(counts, (ia, ib), 1)
    return counts, la, lb


def match_segments(a, b) -> dict[int, int]:
    """One-to-one map from labels of ``a`` to labels of ``b`` maximising total overlap.

    Pairs with zero overlap are left unmatched.
    """
    counts, la, lb = overlap_matrix(a, b)
    if counts.size == 0:
        return {}
    rows, cols = linear_sum_assignment(counts, maximize=True)
    return {int(la[r]): int(lb[c]) for r, c in zip(rows, cols) if counts[r, c] > 0}


def jaccard(a, b) -> float:
    """Matched intersection over the union of non-background nodes."""
    fa, fb = _check_pair(a, b)
    union = int(np.count_nonzero((fa > 0) | (fb > 0)))
    if union == 0:
        return 1.0
    mapping = match_segments(a, b)
    if not mapping:
        return 0.0
    keys = np.fromiter(mapping.keys(), dtype=np.int64)
    vals = np.fromiter(mapping.values(), dtype=np.int64)
    target = np.full(fa.max() + 1, -1, dtype=np.int64)
    target[keys] = vals
    hit = (fa > 0) & (fb > 0) & (target[fa] == fb)
    return int(np.count_nonzero(hit)) / union


def count_flows(label_map) -> int:
    m = np.asarray(label_map)
    return int(np.unique(m[m > 0]).size)


def eval_row(sequence, pred, gt, time_total=None) -> dict:
    return {
        "sequence": sequence,
        "jaccard": f"{jaccard(gt, pred):.6f}",
        "n_flows_pred": count_flows(pred),
        "n_flows_gt": count_flows(gt),
        "time_total_s": "" if time_total is None else f"{time_total:.6f}",
    }


def write_csv(rows, columns, fh, header=True):
    writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
    if header:
        writer.writeheader()
    for row in rows:
        writer.writerow(row)


def timing_report(results) -> tuple[str, str]:
    """Render ``(name, timings)`` pairs as an aligned text table and as CSV.

    ``timings`` is a mapping with keys from TIMING_STAGES (seconds). Row
    order follows the input.
    """
    results = list(results)
    columns = ["sequence"] + [f"{s}_s" for s in TIMING_STAGES]
    rows = []
    for name, timings in results:
        row = {"sequence": name}
        for stage in TIMING_STAGES:
            value = timings.get(stage)
            row[f"{stage}_s"] = "" if value is None else f"{value:.4f}"
        rows.append(row)

    buf = io.StringIO()
    write_csv(rows, columns, buf)
    widths = [max([len(c)] + [len(str(r[c])) for r in rows]) for c in columns]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    for r in rows:
        lines.append("  ".join(str(r[c]).ljust(w) for c, w in zip(columns, widths)))
    text = "\n".join(line.rstrip() for line in lines) + "\n"
    return text, buf.getvalue()
