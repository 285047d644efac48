"""Virtual-address bookkeeping: per-epoch vIP assignment, the DNS record
timeline, and the controller's packet-in decision."""

from __future__ import annotations

import numpy as np

from .packets import CLIENT_ADDR_BASE, VIP_ADDR_BASE

DROP = "drop"
INSTALL_INBOUND = "install_inbound"    # rewrite dst vIP -> rIP for this source
INSTALL_OUTBOUND = "install_outbound"  # rewrite src rIP -> vIP for this destination


# Each server shuffles inside its own address block, the way a host draws
# fresh addresses from its subnet pool; the block prefix is recoverable from
# any of its addresses without knowing the mapping.
SERVER_BLOCK = 1_000_000


class AddressMapping:
    """Deterministic per-epoch vIP assignment for the protected servers.

    Every server keeps a stable rIP (its index) and receives one fresh vIP
    per epoch; vIPs are never reused across epochs.
    """

    def __init__(self, n_servers: int):
        self.n_servers = n_servers

    def vip(self, epoch: int, server: int) -> int:
        if not 0 <= server < self.n_servers:
            raise ValueError(f"server index {server} out of range")
        return VIP_ADDR_BASE + server * SERVER_BLOCK + epoch

    def epoch_vips(self, epoch: int) -> list:
        return [self.vip(epoch, s) for s in range(self.n_servers)]


def server_of_vip(vip: int) -> int:
    """Stable destination-host key (the address block prefix)."""
    return (vip - VIP_ADDR_BASE) // SERVER_BLOCK


def epoch_of_vip(vip: int) -> int:
    return (vip - VIP_ADDR_BASE) % SERVER_BLOCK


def client_addr(client: int) -> int:
    return CLIENT_ADDR_BASE + client


def controller_action(src_is_member: bool, dst_is_member: bool) -> str:
    """What the controller does with a packet forwarded by a rule-less switch.

    A packet is only worth a rule when one endpoint belongs to the protected
    network under its current addressing; anything else is dropped.
    """
    if src_is_member:
        return INSTALL_OUTBOUND
    if dst_is_member:
        return INSTALL_INBOUND
    return DROP


class DnsTimeline:
    """When each epoch's records become visible to clients.

    ``fresh[i]`` is the first instant a lookup returns epoch ``i`` addresses.
    Epoch 0 is pre-seeded at t=0 so the session starts resolvable.
    """

    def __init__(self, fresh_times: np.ndarray):
        fresh = np.asarray(fresh_times, dtype=np.float64)
        if len(fresh) == 0 or fresh[0] != 0.0:
            raise ValueError("epoch 0 records must be available from t=0")
        if np.any(np.diff(fresh) < 0):
            raise ValueError("record refresh times must be non-decreasing")
        self.fresh = fresh

    def record_epoch_at(self, t: float) -> int:
        """Epoch whose addresses a lookup served at time ``t`` returns."""
        return int(np.searchsorted(self.fresh, t, side="right")) - 1


def build_dns_timeline(mechanism: str, trigger_times: np.ndarray,
                       dns_update_delay_s: float,
                       oti_install_duration_s: float) -> DnsTimeline:
    """DNS freshness per epoch.

    ODI and PEI push the update at trigger time; OTI pushes it only after the
    batch installation finishes. Both lag by the record propagation delay.
    The initial epoch is seeded before the session starts.
    """
    fresh = np.asarray(trigger_times, dtype=np.float64) + dns_update_delay_s
    if mechanism == "OTI":
        fresh = fresh + oti_install_duration_s
    fresh[0] = 0.0
    return DnsTimeline(fresh)
