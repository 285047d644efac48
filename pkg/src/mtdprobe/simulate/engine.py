"""Per-session traffic engine.

One simulated session walks every client request through DNS resolution,
staleness races against the shuffle schedule, on-demand rule installation
(ODI), batched installation windows (OTI), pre-activated rules (PEI), and
webpage delivery, producing both the attacker-visible packet record and the
defender-side ground truth.

Randomness is split into two child streams of the session seed: stream A
drives workload shape (arrivals, servers, page sizes, resolution timing),
stream B drives delivery noise (path jitter, processing gaps, slow-path
penalties). The split keeps packet emission optional without perturbing the
draw sequence.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..config import MSS_BYTES, SimConfig
from ..flowrecord import FlowRecord, iat_stats
from .addressing import AddressMapping, build_dns_timeline, client_addr
from .packets import (
    ACK, DATA, DNS_ADDR, DNS_PORT, DNS_QUERY, DNS_REPLY, FIN, HTTP_PORT,
    CLIENT_PORT_BASE, SIZE_ACK, SIZE_DNS_QUERY, SIZE_DNS_REPLY, SIZE_FIN,
    SIZE_REQUEST, SIZE_SYN, SIZE_SYNACK, SYN, SYNACK, PacketTrace,
    TriggerLog, TriggerRecord,
)
from .schedule import build_trigger_schedule


@dataclass
class SimStats:
    """Session counters and bookkeeping useful for diagnostics and tests."""

    n_requests: int = 0
    n_flows: int = 0
    n_retried: int = 0
    n_gave_up: int = 0
    rebuild_windows: dict = field(default_factory=dict)  # epoch -> (start, end)
    delay_t: Optional[np.ndarray] = None      # arrival time of delivered packets
    delay_s: Optional[np.ndarray] = None      # matching one-way transit delays


class _Plan:
    """Phase-A outcome for one client request."""

    __slots__ = ("conn_id", "client", "server", "size_bytes", "attempts",
                 "epoch", "vip", "gave_up", "detour_s", "wait_until", "slow",
                 "relayed")

    def __init__(self, conn_id, client, server, size_bytes):
        self.conn_id = conn_id
        self.client = client
        self.server = server
        self.size_bytes = size_bytes
        self.attempts = []        # (query_t, reply_t, syn_send, syn_arr, vip)
        self.epoch = -1
        self.vip = -1
        self.gave_up = False
        self.detour_s = 0.0       # controller round trip charged to the SYN
        self.wait_until = 0.0     # SYN parked at the edge until this instant
        self.slow = False         # rides the churning slow path
        self.relayed = False      # whole connection hauled by the controller


def _client_arrivals(cfg: SimConfig, rng: np.random.Generator):
    """Merged (time, client) request arrivals over the window."""
    rate = cfg.lambda_total / cfg.n_clients
    per_client = []
    for _ in range(cfg.n_clients):
        times = []
        t = 0.0
        while True:
            block = rng.exponential(1.0 / rate, size=256)
            for dt in block:
                t += dt
                if t >= cfg.observation_window_s:
                    break
                times.append(t)
            else:
                continue
            break
        per_client.append(np.asarray(times))
    t0 = np.concatenate(per_client) if per_client else np.empty(0)
    clients = np.concatenate([np.full(len(ts), c, dtype=np.int64)
                              for c, ts in enumerate(per_client)])
    order = np.argsort(t0, kind="stable")
    return t0[order], clients[order]


class _Engine:
    def __init__(self, config: SimConfig):
        self.cfg = config
        seq = np.random.SeedSequence(config.seed)
        a, b = seq.spawn(2)
        self.rng_a = np.random.default_rng(a)
        self.rng_b = np.random.default_rng(b)
        self.triggers = build_trigger_schedule(config, self.rng_a)
        self.trigger_list = self.triggers.tolist()
        self.mapping = AddressMapping(config.n_servers)
        self.dns = build_dns_timeline(config.mechanism, self.triggers,
                                      config.dns_update_delay_s,
                                      config.oti_install_duration_s)
        self.dns_fresh = self.dns.fresh.tolist()
        self.eta = config.oti_install_duration_s

    def _epoch_at(self, t: float) -> int:
        return bisect_right(self.trigger_list, t) - 1

    def _record_epoch_at(self, t: float) -> int:
        return bisect_right(self.dns_fresh, t) - 1

    # ---------------------------------------------------------------- phase A

    def _resolve_connections(self):
        cfg = self.cfg
        rng = self.rng_a
        t0, clients = _client_arrivals(cfg, rng)
        n = len(t0)
        servers = rng.integers(0, cfg.n_servers, size=n)
        sizes = np.clip(rng.normal(cfg.webpage_mean_bytes, cfg.webpage_sd_bytes, size=n),
                        cfg.webpage_min_bytes, cfg.webpage_max_bytes)
        hop = cfg.hop_latency_s
        jsd = cfg.hop_jitter_sd_s
        is_oti = cfg.mechanism == "OTI"
        plans = []
        for i in range(n):
            plan = _Plan(i, int(clients[i]), int(servers[i]), float(sizes[i]))
            query_t = float(t0[i])
            for _ in range(cfg.max_dns_retries):
                reply_t = query_t + cfg.dns_lookup_s + max(0.0, rng.normal(0.0, jsd))
                rec_epoch = self._record_epoch_at(reply_t)
                vip = self.mapping.vip(rec_epoch, plan.server)
                syn_send = reply_t + cfg.client_proc_s
                syn_arr = syn_send + max(0.0, hop + rng.normal(0.0, jsd))
                arr_epoch = self._epoch_at(syn_arr)
                plan.attempts.append((query_t, reply_t, syn_send, syn_arr, vip))
                if arr_epoch == rec_epoch:
                    plan.epoch = arr_epoch
                    plan.vip = vip
                    if is_oti:
                        offset = syn_arr - self.trigger_list[arr_epoch]
                        if offset <= self.eta:
                            # Arrived at a switch mid-installation: hauled to
                            # the controller like any unmatched packet.
                            plan.relayed = True
                            plan.slow = True
                            plan.detour_s = cfg.controller_rtt_s
                        elif offset <= self.eta + cfg.oti_flush_s:
                            # Freshly repopulated table still flushing: rules
                            # match but ride the slow path briefly.
                            plan.slow = True
                    break
                if is_oti:
                    # Batch installation keeps a list of expected clients, so
                    # unmatched traffic is relayed by the controller instead
                    # of dying: packet-in cost plus the slow path.
                    plan.epoch = arr_epoch
                    plan.vip = vip
                    plan.detour_s = cfg.controller_rtt_s
                    plan.slow = True
                    plan.relayed = True
                    break
                # Stale address: the edge has no current mapping for it, the
                # SYN dies, and the client re-resolves after its timeout.
                query_t = syn_send + cfg.stale_retry_timeout_s
            else:
                plan.gave_up = True
            plans.append(plan)
        return plans

    def _apply_odi_installs(self, plans):
        """On-demand rule bookkeeping: detours, queued SYNs, churn windows."""
        cfg = self.cfg
        settle = cfg.rebuild_settle_s
        churn_start: dict = {}
        install_done: dict = {}
        complete: dict = {}
        live = sorted((p for p in plans if not p.gave_up),
                      key=lambda p: p.attempts[-1][3])
        for plan in live:
            syn_arr = plan.attempts[-1][3]
            e = plan.epoch
            if e not in churn_start:
                churn_start[e] = syn_arr
            key = (e, plan.client, plan.server)
            done = install_done.get(key)
            if done is None:
                done = syn_arr + cfg.controller_rtt_s
                install_done[key] = done
                plan.detour_s = cfg.controller_rtt_s
                if e not in complete or done > complete[e]:
                    complete[e] = done
            elif syn_arr < done:
                plan.wait_until = done
            plan.slow = churn_start[e] <= syn_arr <= churn_start[e] + settle
        windows = {e: (start, start + settle) for e, start in churn_start.items()}
        return complete, windows

    # ---------------------------------------------------------------- phase B

    def run(self, emit_packets: bool, record_delays: bool = False):
        cfg = self.cfg
        plans = self._resolve_connections()
        if cfg.mechanism == "ODI":
            complete, windows = self._apply_odi_installs(plans)
        else:
            complete, windows = {}, {}

        rng = self.rng_b
        hop = cfg.hop_latency_s
        links = cfg.n_path_links
        sd_rest = cfg.hop_jitter_sd_s * math.sqrt(max(links - 1, 1))
        sd_full = cfg.hop_jitter_sd_s * math.sqrt(links)
        base_rest = (links - 1) * hop
        base_full = links * hop
        gap = MSS_BYTES * 8.0 / cfg.link_bandwidth_bps
        proc = cfg.client_proc_s

        flows = []
        stats = SimStats(n_requests=len(plans), rebuild_windows=windows)
        chunks = [] if emit_packets else None
        delay_t: list = []
        delay_v: list = []

        for plan in plans:
            pre_times: list = []
            pre_kinds: list = []
            pre_src: list = []
            pre_dst: list = []
            pre_size: list = []
            src = client_addr(plan.client)
            if emit_packets:
                for (q_t, r_t, s_t, _arr, vip) in plan.attempts:
                    pre_times += [q_t, r_t]
                    pre_kinds += [DNS_QUERY, DNS_REPLY]
                    pre_src += [src, DNS_ADDR]
                    pre_dst += [DNS_ADDR, src]
                    pre_size += [SIZE_DNS_QUERY, SIZE_DNS_REPLY]
                for (_q, _r, s_t, _arr, vip) in plan.attempts[:-1]:
                    pre_times.append(s_t)
                    pre_kinds.append(SYN)
                    pre_src.append(src)
                    pre_dst.append(vip)
                    pre_size.append(SIZE_SYN)
                if plan.gave_up:
                    last = plan.attempts[-1]
                    pre_times.append(last[2])
                    pre_kinds.append(SYN)
                    pre_src.append(src)
                    pre_dst.append(last[4])
                    pre_size.append(SIZE_SYN)
            if plan.gave_up:
                stats.n_gave_up += 1
                if emit_packets and pre_times:
                    chunks.append(self._chunk(plan, pre_times, pre_kinds,
                                              pre_src, pre_dst, pre_size))
                continue

            _q, _r, syn_send, syn_arr, vip = plan.attempts[-1]
            legs = rng.normal(0.0, 1.0, 3)
            think = rng.uniform(cfg.server_think_lo_s, cfg.server_think_hi_s)
            n_resp = int(math.ceil(plan.size_bytes / MSS_BYTES))
            resp_jit = rng.normal(0.0, sd_full, n_resp)
            if plan.slow:
                # Connection setup rides the churning slow path: a per-flow
                # handshake penalty plus per-packet forwarding noise. A
                # connection relayed end-to-end by the controller pays more
                # on every packet.
                y_mean = (cfg.relay_packet_mean_s if plan.relayed
                          else cfg.slowpath_packet_mean_s)
                x_flow = cfg.slowpath_flow_floor_s + rng.exponential(cfg.slowpath_flow_mean_s)
                y_legs = rng.exponential(y_mean, 3)
                y_resp = rng.exponential(y_mean, n_resp)
            else:
                x_flow = 0.0
                y_legs = (0.0, 0.0, 0.0)
                y_resp = 0.0

            wait_extra = max(0.0, plan.wait_until - syn_arr)
            syn_server = (syn_arr + base_rest + legs[0] * sd_rest
                          + plan.detour_s + wait_extra + x_flow + y_legs[0])
            synack_sniff = syn_server + base_full + legs[1] * sd_full + x_flow + y_legs[1]
            ack_sniff = synack_sniff + proc
            req_sniff = ack_sniff + proc
            x_req = x_flow if plan.relayed else 0.0
            req_server = req_sniff + base_full + legs[2] * sd_full + x_req + y_legs[2]
            resp_send = req_server + think + gap * np.arange(1, n_resp + 1)
            resp_arr = resp_send + base_full + resp_jit + y_resp
            resp_arr.sort()
            fin_sniff = float(resp_arr[-1]) + gap

            if record_delays:
                delay_t.append(np.concatenate(([syn_server, synack_sniff, req_server], resp_arr)))
                delay_v.append(np.concatenate((
                    [syn_server - syn_send, synack_sniff - syn_server,
                     req_server - req_sniff], resp_arr - resp_send)))

            n_dropped = len(plan.attempts) - 1
            # Direction statistics describe the successful attempt; earlier
            # probe SYNs only contribute to the packet and byte counts.
            fwd_times = np.array([syn_send, ack_sniff, req_sniff])
            bwd_times = np.empty(n_resp + 2)
            bwd_times[0] = synack_sniff
            bwd_times[1:-1] = resp_arr
            bwd_times[-1] = fin_sniff
            f_mean, f_sd, f_min, f_max = iat_stats(fwd_times)
            b_mean, b_sd, b_min, b_max = iat_stats(bwd_times)
            size_int = int(round(plan.size_bytes))
            flows.append(FlowRecord(
                conn_id=plan.conn_id, client=src, dst_vip=plan.vip,
                dst_host=plan.server,
                start_t=plan.attempts[0][2], end_t=fin_sniff,
                syn_t=syn_send, synack_t=synack_sniff, ack_t=ack_sniff,
                first_data_t=float(resp_arr[0]),
                fwd_pkts=3 + n_dropped, bwd_pkts=2 + n_resp,
                fwd_bytes=SIZE_SYN * (1 + n_dropped) + SIZE_ACK + SIZE_REQUEST,
                bwd_bytes=SIZE_SYNACK + size_int + SIZE_FIN,
                fwd_iat_mean=f_mean, fwd_iat_sd=f_sd, fwd_iat_min=f_min, fwd_iat_max=f_max,
                bwd_iat_mean=b_mean, bwd_iat_sd=b_sd, bwd_iat_min=b_min, bwd_iat_max=b_max,
                retried=n_dropped > 0))
            stats.n_flows += 1
            if n_dropped:
                stats.n_retried += 1

            if emit_packets:
                last_size = size_int - (n_resp - 1) * MSS_BYTES
                times = (pre_times
                         + [syn_send, synack_sniff, ack_sniff, req_sniff]
                         + resp_arr.tolist() + [fin_sniff])
                kinds = (pre_kinds + [SYN, SYNACK, ACK, DATA]
                         + [DATA] * n_resp + [FIN])
                srcs = (pre_src + [src, plan.vip, src, src]
                        + [plan.vip] * (n_resp + 1))
                dsts = (pre_dst + [plan.vip, src, plan.vip, plan.vip]
                        + [src] * (n_resp + 1))
                sizes = (pre_size + [SIZE_SYN, SIZE_SYNACK, SIZE_ACK, SIZE_REQUEST]
                         + [MSS_BYTES] * (n_resp - 1) + [last_size, SIZE_FIN])
                chunks.append(self._chunk(plan, times, kinds, srcs, dsts, sizes))

        flows.sort(key=lambda f: (f.start_t, f.conn_id))
        truth = TriggerLog(
            mechanism=cfg.mechanism,
            triggers=[TriggerRecord(i, float(t),
                                    complete.get(i) if cfg.mechanism == "ODI" else None)
                      for i, t in enumerate(self.triggers)])
        if record_delays and delay_t:
            stats.delay_t = np.concatenate(delay_t)
            stats.delay_s = np.concatenate(delay_v)
        trace = PacketTrace.concatenate(chunks) if emit_packets and chunks else None
        if emit_packets and chunks is not None and not chunks:
            trace = PacketTrace([], [], [], [], [], [], [], [])
        return trace, flows, truth, stats

    def _chunk(self, plan, times, kinds, srcs, dsts, sizes):
        n = len(times)
        port = CLIENT_PORT_BASE + plan.conn_id % 50000
        src_addr = client_addr(plan.client)
        sports = np.empty(n, dtype=np.uint16)
        dports = np.empty(n, dtype=np.uint16)
        karr = np.asarray(kinds, dtype=np.uint8)
        sarr = np.asarray(srcs, dtype=np.uint32)
        client_side = sarr == src_addr
        dns_side = (karr == DNS_QUERY) | (karr == DNS_REPLY)
        sports[client_side] = port
        dports[~client_side] = port
        sports[~client_side & dns_side] = DNS_PORT
        dports[client_side & dns_side] = DNS_PORT
        sports[~client_side & ~dns_side] = HTTP_PORT
        dports[client_side & ~dns_side] = HTTP_PORT
        return PacketTrace(np.asarray(times), sarr, np.asarray(dsts, dtype=np.uint32),
                           sports, dports, karr, np.asarray(sizes, dtype=np.uint32),
                           np.full(n, plan.conn_id, dtype=np.uint32))


def run_simulation(config: SimConfig):
    """Full packet-level session: (trace, truth).

    Identical configs (same seed) produce identical traces. Memory scales
    with total packet count; at the default request rate a two-hour window
    holds roughly 1e8 packets (a few GB), so prefer
    :func:`simulate_flow_records` when only flow statistics are needed.
    """
    trace, _flows, truth, _stats = _Engine(config).run(emit_packets=True)
    return trace, truth


def simulate_flow_records(config: SimConfig, record_delays: bool = False):
    """Streamed session: per-connection flow records without packet storage.

    Draws the same random sequence as :func:`run_simulation`, so the records
    match what :func:`mtdprobe.features.flows.assemble_flows` reconstructs
    from the full trace.
    """
    _trace, flows, truth, stats = _Engine(config).run(
        emit_packets=False, record_delays=record_delays)
    return flows, truth, stats
