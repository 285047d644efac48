"""Numeric feature extraction over assembled flows.

Per-flow dimensions cover duration, packet/byte volumes, rates, directional
inter-arrival statistics, and handshake delays; window dimensions add
inter-flow arrival statistics, rolling destination-address entropy, and a
new-destination indicator over the trailing ``window_w`` flows.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator

FEATURE_NAMES = [
    "duration",
    "fwd_pkts", "bwd_pkts", "fwd_bytes", "bwd_bytes",
    "bytes_per_s", "pkts_per_s",
    "fwd_iat_mean", "fwd_iat_sd", "fwd_iat_min", "fwd_iat_max",
    "bwd_iat_mean", "bwd_iat_sd", "bwd_iat_min", "bwd_iat_max",
    "syn_synack_delay", "synack_ack_delay", "ack_first_data_delay",
    "handshake_body_ratio",
    "interflow_arrival", "time_since_prev_end",
    "interflow_roll_mean", "interflow_roll_sd",
    "dst_ip_entropy", "new_dst_indicator",
]

# Families used when ranking importances; timing/rate families are the ones
# a shuffle trigger is expected to light up.
FEATURE_FAMILIES = {
    "duration": "duration",
    "fwd_pkts": "volume", "bwd_pkts": "volume",
    "fwd_bytes": "volume", "bwd_bytes": "volume",
    "bytes_per_s": "rate", "pkts_per_s": "rate",
    "fwd_iat_mean": "iat", "fwd_iat_sd": "iat",
    "fwd_iat_min": "iat", "fwd_iat_max": "iat",
    "bwd_iat_mean": "iat", "bwd_iat_sd": "iat",
    "bwd_iat_min": "iat", "bwd_iat_max": "iat",
    "syn_synack_delay": "handshake_delay", "synack_ack_delay": "handshake_delay",
    "ack_first_data_delay": "handshake_delay", "handshake_body_ratio": "handshake_delay",
    "interflow_arrival": "inter_flow", "time_since_prev_end": "inter_flow",
    "interflow_roll_mean": "inter_flow", "interflow_roll_sd": "inter_flow",
    "dst_ip_entropy": "address", "new_dst_indicator": "address",
}

TIMING_RATE_FAMILIES = frozenset({"handshake_delay", "inter_flow", "iat", "rate"})

LABEL_POSITIVE = "post_trigger"
LABEL_NEGATIVE = "normal"


@dataclass
class FeatureMatrix:
    """Feature rows plus per-flow metadata never fed to the learner."""

    names: list
    X: np.ndarray
    start_t: np.ndarray
    estimate_t: np.ndarray
    labels: Optional[np.ndarray] = None  # 1 post-trigger / 0 normal

    def __len__(self) -> int:
        return self.X.shape[0]

    def take(self, idx: np.ndarray) -> "FeatureMatrix":
        return FeatureMatrix(
            names=list(self.names), X=self.X[idx], start_t=self.start_t[idx],
            estimate_t=self.estimate_t[idx],
            labels=None if self.labels is None else self.labels[idx])

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.names.index(name)]


def _entropy_bits(counts: Counter, total: int) -> float:
    h = 0.0
    for c in counts.values():
        p = c / total
        h -= p * math.log2(p)
    return h


class FeatureExtractor(BaseEstimator):
    """Stateless flow-to-feature transformer (estimator-style interface)."""

    def __init__(self, window_w: int = 10):
        self.window_w = window_w

    def fit(self, flows=None, y=None):
        if self.window_w < 2:
            raise ValueError("window_w must be >= 2")
        return self

    def transform(self, flows: Sequence) -> FeatureMatrix:
        self.fit()
        n = len(flows)
        d = len(FEATURE_NAMES)
        X = np.empty((n, d))
        start_t = np.fromiter((f.start_t for f in flows), float, n)
        w = self.window_w

        roll_ifa = deque(maxlen=w)
        roll_host = deque(maxlen=w)
        host_counts: Counter = Counter()
        roll_vip = deque(maxlen=w)
        vip_counts: Counter = Counter()
        prev_start = None
        prev_end = None
        for i, f in enumerate(flows):
            duration = f.end_t - f.start_t
            dur = max(duration, 1e-6)
            ifa = 0.0 if prev_start is None else f.start_t - prev_start
            since_end = 0.0 if prev_end is None else f.start_t - prev_end
            new_dst = 0.0 if f.dst_vip in vip_counts else 1.0
            if len(roll_vip) == w:
                old = roll_vip[0]
                vip_counts[old] -= 1
                if not vip_counts[old]:
                    del vip_counts[old]
            roll_vip.append(f.dst_vip)
            vip_counts[f.dst_vip] += 1
            if len(roll_host) == w:
                old = roll_host[0]
                host_counts[old] -= 1
                if not host_counts[old]:
                    del host_counts[old]
            roll_host.append(f.dst_host)
            host_counts[f.dst_host] += 1
            roll_ifa.append(ifa)
            ifa_arr = np.fromiter(roll_ifa, float, len(roll_ifa))
            s2s = f.synack_t - f.syn_t
            X[i] = (
                duration,
                f.fwd_pkts, f.bwd_pkts, f.fwd_bytes, f.bwd_bytes,
                (f.fwd_bytes + f.bwd_bytes) / dur,
                (f.fwd_pkts + f.bwd_pkts) / dur,
                f.fwd_iat_mean, f.fwd_iat_sd, f.fwd_iat_min, f.fwd_iat_max,
                f.bwd_iat_mean, f.bwd_iat_sd, f.bwd_iat_min, f.bwd_iat_max,
                s2s,
                f.ack_t - f.synack_t,
                f.first_data_t - f.ack_t,
                s2s / max(f.fwd_iat_mean, 1e-6),
                ifa, since_end,
                float(ifa_arr.mean()), float(ifa_arr.std()),
                _entropy_bits(host_counts, len(roll_host)),
                new_dst,
            )
            prev_start = f.start_t
            prev_end = f.end_t
        if not np.all(np.isfinite(X)):
            raise ValueError("feature extraction produced non-finite values")
        syn_t = np.fromiter((f.syn_t for f in flows), float, n)
        estimate_t = syn_t + np.maximum(X[:, FEATURE_NAMES.index("syn_synack_delay")],
                                        X[:, FEATURE_NAMES.index("fwd_iat_max")])
        return FeatureMatrix(names=list(FEATURE_NAMES), X=X,
                             start_t=start_t, estimate_t=estimate_t)


def extract_features(flows: Sequence, window_w: int = 10) -> FeatureMatrix:
    """Functional wrapper around :class:`FeatureExtractor`."""
    return FeatureExtractor(window_w=window_w).fit().transform(flows)
