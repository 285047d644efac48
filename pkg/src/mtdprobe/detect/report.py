"""Per-trial detection analysis and its flat report row."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..features.extract import FeatureMatrix
from ..simulate.packets import TriggerLog
from .metrics import adjusted_rand_index, clustering_accuracy
from .triggers import (
    DEFAULT_GROUP_GAP_S, MatchResult, estimate_interval,
    group_trigger_estimates, identify_trigger_cluster, match_detections,
    trigger_time_estimates,
)

REPORT_COLUMNS = [
    "mechanism", "T", "trigger_mode", "lambda_total", "n_clients", "n_servers",
    "s", "O_win", "seed", "ari", "accuracy", "T_hat", "interval_error_rate",
    "tp", "fp", "fn", "median_delta_tA",
]


@dataclass
class DetectionReport:
    predicted: np.ndarray          # 1 for flows in the trigger cluster
    trigger_cluster: int
    grouped_times: np.ndarray
    match: MatchResult
    interval_estimate: Optional[float]
    ari: float
    accuracy: float
    interval_error_rate: Optional[float] = None
    delays_true: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def median_attacker_delay(self) -> Optional[float]:
        d = self.match.delays
        return float(np.median(d)) if d.size else None


def analyze_trial(matrix: FeatureMatrix, assignments: np.ndarray,
                  truth: TriggerLog, allowed_delay_s: float,
                  group_gap_s: float = DEFAULT_GROUP_GAP_S,
                  true_interval_s: Optional[float] = None) -> DetectionReport:
    """Score one window: per-flow agreement, trigger matching, interval."""
    if matrix.labels is None:
        raise ValueError("matrix must carry ground-truth labels for analysis")
    assignments = np.asarray(assignments)
    cluster = identify_trigger_cluster(assignments, matrix)
    predicted = (assignments == cluster).astype(np.int8)
    estimates = trigger_time_estimates(matrix, assignments, cluster)
    grouped = group_trigger_estimates(estimates, gap=group_gap_s)
    trigger_times = truth.times
    match = match_detections(grouped, trigger_times, allowed_delay_s)
    interval = estimate_interval(grouped)
    if true_interval_s is None:
        realized = np.diff(trigger_times)
        true_interval_s = float(realized.mean()) if realized.size else None
    err = None
    if interval is not None and true_interval_s:
        err = abs(interval - true_interval_s) / true_interval_s
    return DetectionReport(
        predicted=predicted,
        trigger_cluster=cluster,
        grouped_times=grouped,
        match=match,
        interval_estimate=interval,
        ari=adjusted_rand_index(matrix.labels, predicted),
        accuracy=clustering_accuracy(matrix.labels, predicted),
        interval_error_rate=err,
    )
