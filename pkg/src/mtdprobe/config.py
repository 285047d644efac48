"""Simulation configuration and validation.

All durations are seconds, all rates are per second. The defaults describe a
small LAN-scale software-defined network: per-hop latency around a
millisecond, a 20 ms controller round trip for a packet-in, and a DNS
refresh that lags the address shuffle by 100 ms.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError

MECHANISMS = ("ODI", "OTI", "PEI")
TRIGGER_MODES = ("fixed", "random")

MSS_BYTES = 1460


@dataclass(frozen=True)
class SimConfig:
    """One simulated sniffing session.

    ``mechanism`` selects how flow rules are refreshed at each shuffle
    trigger: on-demand (``ODI``), batched at trigger time (``OTI``), or
    pre-installed with a delayed activation time (``PEI``).
    """

    mechanism: str = "ODI"
    interval_s: float = 180.0            # time between shuffle triggers (T)
    trigger_mode: str = "fixed"          # "fixed" or "random"
    random_lo_s: float = 15.0            # random mode: truncation bounds
    random_hi_s: float = 300.0
    observation_window_s: float = 7200.0  # how long the sniffer listens
    lambda_total: float = 10.0           # client requests/s across all clients
    n_clients: int = 1
    n_servers: int = 1
    webpage_mean_bytes: float = 2_000_000.0
    webpage_sd_bytes: float = 600_000.0
    webpage_min_bytes: float = 400_000.0
    webpage_max_bytes: float = 4_000_000.0
    n_switches_on_path: int = 2
    hop_latency_s: float = 0.001
    hop_jitter_sd_s: float = 0.0002
    controller_rtt_s: float = 0.020      # packet-in -> rule install -> confirm
    rule_install_s: float = 0.005        # per rule, batched installation
    dns_update_delay_s: float = 0.100    # DNS push -> records actually served
    dns_lookup_s: float = 0.002
    stale_retry_timeout_s: float = 1.0   # client gives up on an unanswered SYN
    pei_lead_s: float = 10.0             # PEI installs this long before activation
    seed: int = 0

    # Plumbing knobs below are artifact defaults, not swept in experiments.
    link_bandwidth_bps: float = 1e9      # sets response-packet serialization gap
    rebuild_settle_s: float = 1.0        # table-churn window after a rule rebuild
    oti_flush_s: float = 0.10            # slow-path tail after a batch install
    relay_packet_mean_s: float = 0.010   # per-packet cost of controller relaying
    slowpath_flow_floor_s: float = 0.025     # handshake penalty while tables churn
    slowpath_flow_mean_s: float = 0.010      # exponential part on top of the floor
    slowpath_packet_mean_s: float = 0.004    # per-packet penalty while churning
    server_think_lo_s: float = 0.010    # request receipt -> first response byte
    server_think_hi_s: float = 0.150
    client_proc_s: float = 0.0001        # deterministic client turnaround
    max_dns_retries: int = 5

    def __post_init__(self):
        validate_config(self)

    def with_(self, **kwargs) -> "SimConfig":
        """Copy with selected fields replaced (re-validates)."""
        return replace(self, **kwargs)

    @property
    def n_path_links(self) -> int:
        return self.n_switches_on_path + 1

    @property
    def oti_install_duration_s(self) -> float:
        """Time to sequentially install every pair rule on every switch."""
        return self.rule_install_s * (2 * self.n_clients * self.n_servers
                                      * self.n_switches_on_path)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown SimConfig fields: {sorted(unknown)}")
        return cls(**data)


def validate_config(cfg: SimConfig) -> None:
    """Raise ConfigError naming the offending field."""
    if cfg.mechanism not in MECHANISMS:
        raise ConfigError(f"mechanism must be one of {MECHANISMS}, got {cfg.mechanism!r}")
    if cfg.trigger_mode not in TRIGGER_MODES:
        raise ConfigError(f"trigger_mode must be one of {TRIGGER_MODES}, got {cfg.trigger_mode!r}")
    if not cfg.interval_s > 0:
        raise ConfigError("interval_s must be > 0")
    if not cfg.observation_window_s > 0:
        raise ConfigError("observation_window_s must be > 0")
    if cfg.trigger_mode == "random" and not (0 < cfg.random_lo_s < cfg.random_hi_s):
        raise ConfigError("random_lo_s/random_hi_s must satisfy 0 < lo < hi")
    if not cfg.lambda_total > 0:
        raise ConfigError("lambda_total must be > 0")
    if cfg.n_clients < 1:
        raise ConfigError("n_clients must be >= 1")
    if cfg.n_servers < 1:
        raise ConfigError("n_servers must be >= 1")
    if cfg.n_switches_on_path < 1:
        raise ConfigError("n_switches_on_path must be >= 1")
    if not (cfg.webpage_min_bytes <= cfg.webpage_mean_bytes <= cfg.webpage_max_bytes):
        raise ConfigError("webpage sizes must satisfy webpage_min_bytes <= "
                          "webpage_mean_bytes <= webpage_max_bytes")
    if cfg.webpage_min_bytes <= 0:
        raise ConfigError("webpage_min_bytes must be > 0")
    if cfg.webpage_sd_bytes < 0:
        raise ConfigError("webpage_sd_bytes must be >= 0")
    for name in ("hop_latency_s", "hop_jitter_sd_s", "controller_rtt_s",
                 "rule_install_s", "dns_update_delay_s", "dns_lookup_s",
                 "rebuild_settle_s", "oti_flush_s", "relay_packet_mean_s",
                 "slowpath_flow_floor_s",
                 "slowpath_flow_mean_s", "slowpath_packet_mean_s",
                 "server_think_lo_s", "server_think_hi_s",
                 "client_proc_s"):
        if getattr(cfg, name) < 0:
            raise ConfigError(f"{name} must be >= 0")
    if not cfg.stale_retry_timeout_s > 0:
        raise ConfigError("stale_retry_timeout_s must be > 0")
    if cfg.mechanism == "PEI" and not (0 < cfg.pei_lead_s < cfg.interval_s):
        raise ConfigError("pei_lead_s must satisfy 0 < pei_lead_s < interval_s")
    if not cfg.link_bandwidth_bps > 0:
        raise ConfigError("link_bandwidth_bps must be > 0")
    if cfg.max_dns_retries < 1:
        raise ConfigError("max_dns_retries must be >= 1")
    if not isinstance(cfg.seed, int) or cfg.seed < 0 or cfg.seed >= 2 ** 64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
