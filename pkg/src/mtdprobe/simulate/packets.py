"""Packet-level types: individual events, the columnar trace, and the
ground-truth trigger log."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple, Optional, Sequence

import numpy as np

# Packet kind codes (stored as uint8 in the columnar trace).
SYN, SYNACK, ACK, DATA, FIN, DNS_QUERY, DNS_REPLY = range(7)
KIND_NAMES = ("SYN", "SYNACK", "ACK", "DATA", "FIN", "DNS_QUERY", "DNS_REPLY")
KIND_CODES = {name: code for code, name in enumerate(KIND_NAMES)}

# Opaque address ids.
DNS_ADDR = 1
CLIENT_ADDR_BASE = 1000
VIP_ADDR_BASE = 20000

HTTP_PORT = 80
DNS_PORT = 53
CLIENT_PORT_BASE = 10000

SIZE_SYN = 60
SIZE_SYNACK = 60
SIZE_ACK = 52
SIZE_REQUEST = 460
SIZE_FIN = 52
SIZE_DNS_QUERY = 70
SIZE_DNS_REPLY = 86


class PacketEvent(NamedTuple):
    """One sniffed packet."""

    t: float
    src: int
    dst: int
    src_port: int
    dst_port: int
    kind: str
    size_bytes: int
    conn_id: int


class PacketTrace:
    """Column-oriented packet trace, time sorted.

    Behaves as a sequence of :class:`PacketEvent`; the columns are exposed
    directly for vectorized consumers.
    """

    __slots__ = ("t", "src", "dst", "src_port", "dst_port", "kind", "size", "conn")

    def __init__(self, t, src, dst, src_port, dst_port, kind, size, conn):
        self.t = np.asarray(t, dtype=np.float64)
        self.src = np.asarray(src, dtype=np.uint32)
        self.dst = np.asarray(dst, dtype=np.uint32)
        self.src_port = np.asarray(src_port, dtype=np.uint16)
        self.dst_port = np.asarray(dst_port, dtype=np.uint16)
        self.kind = np.asarray(kind, dtype=np.uint8)
        self.size = np.asarray(size, dtype=np.uint32)
        self.conn = np.asarray(conn, dtype=np.uint32)

    def __len__(self) -> int:
        return self.t.shape[0]

    def __getitem__(self, i: int) -> PacketEvent:
        return PacketEvent(
            float(self.t[i]), int(self.src[i]), int(self.dst[i]),
            int(self.src_port[i]), int(self.dst_port[i]),
            KIND_NAMES[self.kind[i]], int(self.size[i]), int(self.conn[i]))

    def __iter__(self) -> Iterator[PacketEvent]:
        for i in range(len(self)):
            yield self[i]

    @classmethod
    def from_events(cls, events: Sequence[PacketEvent]) -> "PacketTrace":
        cols = list(zip(*events)) if events else [[]] * 8
        kind = [KIND_CODES[k] for k in cols[5]]
        return cls(cols[0], cols[1], cols[2], cols[3], cols[4], kind, cols[6], cols[7])

    @classmethod
    def concatenate(cls, parts: Sequence["PacketTrace"]) -> "PacketTrace":
        trace = cls(*[np.concatenate([getattr(p, name) for p in parts])
                      for name in cls.__slots__])
        order = np.argsort(trace.t, kind="stable")
        for name in cls.__slots__:
            setattr(trace, name, getattr(trace, name)[order])
        return trace


@dataclass(frozen=True)
class TriggerRecord:
    """Ground truth for one shuffle trigger."""

    index: int
    t: float
    t_complete: Optional[float]  # last on-demand rule completion; None when n/a


@dataclass
class TriggerLog:
    """Ground-truth trigger times for one simulated session."""

    mechanism: str
    triggers: list  # list[TriggerRecord]

    @property
    def times(self) -> np.ndarray:
        return np.array([rec.t for rec in self.triggers], dtype=np.float64)

    @property
    def complete_times(self) -> np.ndarray:
        return np.array([np.nan if rec.t_complete is None else rec.t_complete
                         for rec in self.triggers], dtype=np.float64)

    def __len__(self) -> int:
        return len(self.triggers)

    def validate(self) -> None:
        times = self.times
        if np.any(np.diff(times) <= 0):
            raise ValueError("trigger times must be strictly increasing")
        if self.mechanism == "ODI":
            comp = self.complete_times
            ok = np.isnan(comp) | (comp >= times)
            if not np.all(ok):
                raise ValueError("ODI rule completion must not precede its trigger")
