"""File formats: packet traces, trigger truth, feature tables, result rows.

Traces are line-delimited text with fields
``t src dst src_port dst_port kind size_bytes conn_id`` and microsecond
timestamps. Truth files are headerless CSV ``i,trigger_t,complete_t`` with
an empty last field when rule completion does not apply. Feature files are
CSV with a header of dimension names plus trailing ``start_t`` and ``label``
columns.
"""

from __future__ import annotations

import csv
from typing import Iterable, Optional

import numpy as np

from .features.extract import (
    FEATURE_NAMES, LABEL_NEGATIVE, LABEL_POSITIVE, FeatureMatrix,
)
from .simulate.packets import KIND_CODES, KIND_NAMES, PacketTrace, TriggerLog, TriggerRecord


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if np.isnan(value):
            return ""
        return repr(value)
    if isinstance(value, (np.floating,)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


# ---------------------------------------------------------------- trace/truth

def write_trace(trace: PacketTrace, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(len(trace)):
            fh.write(f"{trace.t[i]:.6f} {trace.src[i]} {trace.dst[i]} "
                     f"{trace.src_port[i]} {trace.dst_port[i]} "
                     f"{KIND_NAMES[trace.kind[i]]} {trace.size[i]} {trace.conn[i]}\n")


def read_trace(path) -> PacketTrace:
    cols = ([], [], [], [], [], [], [], [])
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            cols[0].append(float(parts[0]))
            for k in (1, 2, 3, 4):
                cols[k].append(int(parts[k]))
            cols[5].append(KIND_CODES[parts[5]])
            cols[6].append(int(parts[6]))
            cols[7].append(int(parts[7]))
    return PacketTrace(*cols)


def write_truth(truth: TriggerLog, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for rec in truth.triggers:
            writer.writerow([rec.index, format_value(rec.t),
                             format_value(rec.t_complete)])


def read_truth(path, mechanism: str = "ODI") -> TriggerLog:
    triggers = []
    with open(path, "r", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            complete = float(row[2]) if len(row) > 2 and row[2] != "" else None
            triggers.append(TriggerRecord(int(row[0]), float(row[1]), complete))
    return TriggerLog(mechanism=mechanism, triggers=triggers)


# ------------------------------------------------------------------- features

def write_features(matrix: FeatureMatrix, path) -> None:
    labels = matrix.labels
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(matrix.names) + ["start_t", "label"])
        for i in range(len(matrix)):
            row = [format_value(v) for v in matrix.X[i]]
            row.append(format_value(float(matrix.start_t[i])))
            if labels is None:
                row.append("")
            else:
                row.append(LABEL_POSITIVE if labels[i] == 1 else LABEL_NEGATIVE)
            writer.writerow(row)


def read_features(path) -> FeatureMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        names = header[:-2]
        rows = []
        starts = []
        labels = []
        any_label = False
        for row in reader:
            rows.append([float(v) for v in row[:-2]])
            starts.append(float(row[-2]))
            if row[-1]:
                any_label = True
                labels.append(1 if row[-1] == LABEL_POSITIVE else 0)
            else:
                labels.append(0)
    X = np.asarray(rows, dtype=np.float64)
    start_t = np.asarray(starts)
    estimate_t = _reconstruct_estimates(names, X, start_t)
    return FeatureMatrix(
        names=names, X=X, start_t=start_t, estimate_t=estimate_t,
        labels=np.asarray(labels, dtype=np.int8) if any_label else None)


def _reconstruct_estimates(names, X, start_t):
    """Symptom-time estimates from the persisted columns (same rule the
    extractor applies)."""
    parts = [np.zeros_like(start_t)]
    for col in ("syn_synack_delay", "fwd_iat_max"):
        if col in names:
            parts.append(X[:, names.index(col)])
    return start_t + np.maximum.reduce(parts)


# -------------------------------------------------------------------- results

def write_rows(path, header: list, rows: Iterable[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
