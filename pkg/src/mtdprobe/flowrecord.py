"""The per-connection record shared by the simulator and the flow assembler."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(slots=True)
class FlowRecord:
    """One client-server connection as the attacker reconstructs it.

    Handshake timestamps come from the successful attempt; ``start_t`` keeps
    the very first SYN so a retried connection is anchored where its stall
    began.
    """

    conn_id: int
    client: int
    dst_vip: int
    dst_host: int
    start_t: float
    end_t: float
    syn_t: float
    synack_t: float
    ack_t: float
    first_data_t: float
    fwd_pkts: int
    bwd_pkts: int
    fwd_bytes: int
    bwd_bytes: int
    fwd_iat_mean: float
    fwd_iat_sd: float
    fwd_iat_min: float
    fwd_iat_max: float
    bwd_iat_mean: float
    bwd_iat_sd: float
    bwd_iat_min: float
    bwd_iat_max: float
    retried: bool

    def validate(self) -> None:
        if not (self.syn_t <= self.synack_t <= self.ack_t <= self.first_data_t
                <= self.end_t):
            raise ValueError(f"conn {self.conn_id}: handshake timestamps out of order")
        if self.fwd_pkts < 1 or self.bwd_pkts < 1:
            raise ValueError(f"conn {self.conn_id}: empty direction")


def iat_stats(times: np.ndarray):
    """(mean, sd, min, max) of successive gaps; zeros when under two packets."""
    if times.shape[0] < 2:
        return 0.0, 0.0, 0.0, 0.0
    d = np.diff(times)
    return float(d.mean()), float(d.std()), float(d.min()), float(d.max())
