"""Ground-truth labeling, class rebalancing, and constant-column removal."""

from __future__ import annotations

from typing import Sequence, Tuple

import numpy as np

from ..simulate.packets import TriggerLog


def label_flows(flows: Sequence, truth: TriggerLog, allowed_delay_s: float) -> np.ndarray:
    """1 for flows starting within ``allowed_delay_s`` after a trigger, else 0.

    Pure in (start times, trigger times, delay); relabeling is idempotent.
    """
    if allowed_delay_s <= 0:
        raise ValueError("allowed_delay_s must be > 0")
    starts = np.fromiter((f.start_t for f in flows), float, len(flows))
    return label_start_times(starts, truth.times, allowed_delay_s)


def label_start_times(starts: np.ndarray, trigger_times: np.ndarray,
                      allowed_delay_s: float) -> np.ndarray:
    idx = np.searchsorted(trigger_times, starts, side="right") - 1
    has_prev = idx >= 0
    gap = np.where(has_prev, starts - trigger_times[np.clip(idx, 0, None)], np.inf)
    return (gap <= allowed_delay_s).astype(np.int8)


def undersample(X: np.ndarray, labels: np.ndarray,
                rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reduce the majority class to the minority size, without replacement.

    Returns (X', labels', kept row indices); the minority class is untouched
    and original row order is preserved.
    """
    labels = np.asarray(labels)
    pos = np.flatnonzero(labels == 1)
    neg = np.flatnonzero(labels == 0)
    if pos.size == 0 or neg.size == 0:
        raise ValueError(
            f"undersample needs both classes, got {pos.size} positive / "
            f"{neg.size} negative rows")
    if pos.size == neg.size:
        keep = np.arange(labels.size)
    else:
        minority, majority = (pos, neg) if pos.size < neg.size else (neg, pos)
        sampled = rng.choice(majority, size=minority.size, replace=False)
        keep = np.sort(np.concatenate((minority, sampled)))
    return X[keep], labels[keep], keep


def drop_constant_features(X: np.ndarray, names: Sequence[str]
                           ) -> Tuple[np.ndarray, list]:
    """Remove zero-variance columns; the kept-name list travels with models
    so transferred datasets can be aligned by name."""
    if X.shape[0] < 2:
        raise ValueError("need at least 2 rows to assess constancy")
    # Relative tolerance: a column whose spread is float dust around a fixed
    # value carries no information and would be amplified by z-scoring.
    spread = np.ptp(X, axis=0)
    keep = spread > 1e-9 * np.maximum(1.0, np.abs(X).max(axis=0))
    kept_names = [n for n, k in zip(names, keep) if k]
    return X[:, keep], kept_names
