"""Partition-agreement metrics, permutation invariant by construction."""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linear_sum_assignment


def _contingency(labels_true, labels_pred):
    labels_true = np.asarray(labels_true)
    labels_pred = np.asarray(labels_pred)
    if labels_true.shape != labels_pred.shape or labels_true.ndim != 1:
        raise ValueError("label vectors must be 1-D and the same length")
    if labels_true.size < 2:
        raise ValueError("need at least 2 samples")
    _, ti = np.unique(labels_true, return_inverse=True)
    _, pi = np.unique(labels_pred, return_inverse=True)
    table = np.zeros((ti.max() + 1, pi.max() + 1), dtype=np.int64)
    np.add.at(table, (ti, pi), 1)
    return table


def _comb2(x):
    return x * (x - 1) / 2.0


def adjusted_rand_index(labels_true, labels_pred) -> float:
    """Chance-corrected pair-counting agreement in [-0.5, 1]."""
    table = _contingency(labels_true, labels_pred)
    n = table.sum()
    sum_cells = _comb2(table.astype(np.float64)).sum()
    sum_rows = _comb2(table.sum(axis=1).astype(np.float64)).sum()
    sum_cols = _comb2(table.sum(axis=0).astype(np.float64)).sum()
    total = _comb2(float(n))
    expected = sum_rows * sum_cols / total
    max_index = 0.5 * (sum_rows + sum_cols)
    if max_index == expected:
        # Both partitions are trivial (single cluster each way): identical.
        return 1.0
    return float((sum_cells - expected) / (max_index - expected))


def clustering_accuracy(labels_true, labels_pred) -> float:
    """Best-case accuracy over one-to-one cluster-to-class mappings."""
    table = _contingency(labels_true, labels_pred)
    if max(table.shape) > 20:
        raise ValueError("clustering_accuracy supports at most 20 clusters/classes")
    rows, cols = linear_sum_assignment(-table)
    return float(table[rows, cols].sum() / table.sum())


def ari_pair_counting_oracle(labels_true, labels_pred) -> float:
    """Brute-force ARI over all O(n^2) sample pairs (test oracle)."""
    labels_true = np.asarray(labels_true)
    labels_pred = np.asarray(labels_pred)
    a = b = c = d = 0
    for i, j in itertools.combinations(range(labels_true.size), 2):
        same_t = labels_true[i] == labels_true[j]
        same_p = labels_pred[i] == labels_pred[j]
        if same_t and same_p:
            a += 1
        elif same_t:
            b += 1
        elif same_p:
            c += 1
        else:
            d += 1
    denom = (a + b) * (b + d) + (a + c) * (c + d)
    if denom == 0:
        return 1.0
    return 2.0 * (a * d - b * c) / denom


def accuracy_permutation_oracle(labels_true, labels_pred) -> float:
    """Exhaustive mapping search (test oracle; factorial in cluster count)."""
    table = _contingency(labels_true, labels_pred)
    r, c = table.shape
    if max(r, c) > 6:
        raise ValueError("oracle limited to 6 clusters")
    best = 0
    small, big = (r, c) if r <= c else (c, r)
    tbl = table if r <= c else table.T
    for perm in itertools.permutations(range(big), small):
        best = max(best, sum(tbl[i, j] for i, j in enumerate(perm)))
    return best / table.sum()
