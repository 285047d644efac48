"""Flow assembly: group sniffed packets into per-connection records."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from ..flowrecord import FlowRecord, iat_stats
from ..simulate.addressing import server_of_vip
from ..simulate.packets import (
    ACK, DATA, DNS_QUERY, DNS_REPLY, FIN, SYN, SYNACK, PacketEvent, PacketTrace,
)

logger = logging.getLogger(__name__)

IDLE_TIMEOUT_S = 60.0  # a flow with no FIN ends at its last packet anyway


@dataclass
class FlowAssembly:
    flows: list
    discarded_no_syn: int = 0
    discarded_incomplete: int = 0


def assemble_flows(trace: Union[PacketTrace, Iterable[PacketEvent]]) -> FlowAssembly:
    """Rebuild per-connection records from a time-sorted packet trace.

    DNS packets never enter flow bodies. Connections with no SYN at all, or
    whose handshake never completed, are dropped and counted.
    """
    if not isinstance(trace, PacketTrace):
        trace = PacketTrace.from_events(list(trace))
    body = (trace.kind != DNS_QUERY) & (trace.kind != DNS_REPLY)
    conn = trace.conn[body]
    t = trace.t[body]
    kind = trace.kind[body]
    src = trace.src[body]
    dst = trace.dst[body]
    size = trace.size[body]

    order = np.lexsort((t, conn))
    conn = conn[order]
    t = t[order]
    kind = kind[order]
    src = src[order]
    dst = dst[order]
    size = size[order]

    bounds = np.flatnonzero(np.diff(conn)) + 1
    starts = np.concatenate(([0], bounds))
    ends = np.concatenate((bounds, [len(conn)]))

    flows = []
    no_syn = 0
    incomplete = 0
    for lo, hi in zip(starts, ends):
        k = kind[lo:hi]
        tt = t[lo:hi]
        syn_idx = np.flatnonzero(k == SYN)
        if syn_idx.size == 0:
            no_syn += 1
            continue
        synack_idx = np.flatnonzero(k == SYNACK)
        ack_idx = np.flatnonzero(k == ACK)
        data_idx = np.flatnonzero(k == DATA)
        if synack_idx.size == 0 or ack_idx.size == 0 or data_idx.size == 0:
            incomplete += 1
            continue
        ack_after = ack_idx[np.searchsorted(ack_idx, synack_idx[-1])
                            :np.searchsorted(ack_idx, synack_idx[-1]) + 1]
        if ack_after.size == 0:
            incomplete += 1
            continue
        client = int(src[lo + syn_idx[0]])
        # The destination the attacker records is the address the successful
        # handshake spoke to.
        vip = int(dst[lo + syn_idx[-1]])
        fwd = np.flatnonzero(src[lo:hi] == client)
        bwd = np.flatnonzero(src[lo:hi] != client)
        bwd_data = data_idx[np.isin(data_idx, bwd)]
        if bwd_data.size == 0:
            incomplete += 1
            continue
        f_mean, f_sd, f_min, f_max = iat_stats(tt[fwd])
        b_mean, b_sd, b_min, b_max = iat_stats(tt[bwd])
        flows.append(FlowRecord(
            conn_id=int(conn[lo]), client=client, dst_vip=vip,
            dst_host=server_of_vip(vip),
            start_t=float(tt[0]), end_t=float(tt[-1]),
            syn_t=float(tt[syn_idx[-1]]),
            synack_t=float(tt[synack_idx[-1]]),
            ack_t=float(tt[ack_after[0]]),
            first_data_t=float(tt[bwd_data[0]]),
            fwd_pkts=int(fwd.size), bwd_pkts=int(bwd.size),
            fwd_bytes=int(size[lo:hi][fwd].sum()),
            bwd_bytes=int(size[lo:hi][bwd].sum()),
            fwd_iat_mean=f_mean, fwd_iat_sd=f_sd, fwd_iat_min=f_min, fwd_iat_max=f_max,
            bwd_iat_mean=b_mean, bwd_iat_sd=b_sd, bwd_iat_min=b_min, bwd_iat_max=b_max,
            retried=syn_idx.size > 1))
    if no_syn or incomplete:
        logger.info("assemble_flows: discarded %d connections without SYN, "
                    "%d with incomplete handshakes", no_syn, incomplete)
    flows.sort(key=lambda f: (f.start_t, f.conn_id))
    return FlowAssembly(flows=flows, discarded_no_syn=no_syn,
                        discarded_incomplete=incomplete)
