"""From cluster assignments to trigger detections and an interval estimate."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..features.extract import FeatureMatrix

DEFAULT_GROUP_GAP_S = 2.0
FOLD_TOLERANCE = 0.10


def identify_trigger_cluster(assignments: np.ndarray, matrix: FeatureMatrix) -> int:
    """The cluster holding post-trigger flows: the smaller one, ties broken
    by the larger mean handshake delay, then by lower cluster id."""
    assignments = np.asarray(assignments)
    ids, counts = np.unique(assignments, return_counts=True)
    if ids.size < 2:
        raise ValueError("need at least 2 populated clusters")
    smallest = counts.min()
    tied = ids[counts == smallest]
    if tied.size == 1:
        return int(tied[0])
    delay = matrix.column("syn_synack_delay")
    means = np.array([delay[assignments == cid].mean() for cid in tied])
    best = means.max()
    winners = tied[means == best]
    if winners.size > 1:
        warnings.warn("trigger-cluster tie on population and handshake delay; "
                      "choosing the lowest cluster id", stacklevel=2)
    return int(winners.min())


def trigger_time_estimates(matrix: FeatureMatrix, assignments: np.ndarray,
                           cluster_id: int) -> np.ndarray:
    """Per-flagged-flow symptom times, sorted ascending."""
    mask = np.asarray(assignments) == cluster_id
    return np.sort(matrix.estimate_t[mask])


def group_trigger_estimates(times: Sequence[float],
                            gap: float = DEFAULT_GROUP_GAP_S) -> np.ndarray:
    """Chain-merge times spaced <= gap; each group reports its earliest time."""
    times = np.sort(np.asarray(times, dtype=np.float64))
    if times.size == 0:
        return times
    starts = [float(times[0])]
    prev = times[0]
    for t in times[1:]:
        if t - prev > gap:
            starts.append(float(t))
        prev = t
    return np.asarray(starts)


@dataclass
class MatchResult:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    matches: list = field(default_factory=list)  # (trigger_t, grouped_t, delay)

    @property
    def delays(self) -> np.ndarray:
        return np.array([m[2] for m in self.matches], dtype=np.float64)


def match_detections(grouped: Sequence[float], trigger_times: Sequence[float],
                     allowed_delay_s: float) -> MatchResult:
    """Greedy one-to-one matching in time order.

    A grouped estimate within the allowed delay of the earliest unmatched
    trigger is a true positive; leftovers are false positives and unmatched
    triggers false negatives.
    """
    grouped = np.sort(np.asarray(grouped, dtype=np.float64))
    truth = np.sort(np.asarray(trigger_times, dtype=np.float64))
    result = MatchResult()
    j = 0
    for g in grouped:
        while j < truth.size and truth[j] < g - allowed_delay_s:
            result.fn += 1
            j += 1
        if j < truth.size and abs(g - truth[j]) <= allowed_delay_s:
            result.tp += 1
            result.matches.append((float(truth[j]), float(g), float(abs(g - truth[j]))))
            j += 1
        else:
            result.fp += 1
    result.fn += truth.size - j
    return result


def estimate_interval(grouped: Sequence[float]) -> Optional[float]:
    """Median of successive gaps, folding gaps that span missed triggers.

    A gap within 10% of an integer multiple m >= 2 of the provisional median
    counts as m intervals, contributing m copies of gap/m. Needs at least
    three grouped detections, i.e. an observation window of 3x the interval
    or more; otherwise returns None.
    """
    grouped = np.sort(np.asarray(grouped, dtype=np.float64))
    if grouped.size < 3:
        return None
    diffs = np.diff(grouped)
    provisional = float(np.median(diffs))
    if provisional <= 0:
        return None
    folded = []
    for gap in diffs:
        m = int(round(gap / provisional))
        if m >= 2 and abs(gap - m * provisional) <= FOLD_TOLERANCE * m * provisional:
            folded.extend([gap / m] * m)
        else:
            folded.append(gap)
    return float(np.median(folded))
