from .engine import SimStats, run_simulation, simulate_flow_records
from .packets import PacketEvent, PacketTrace, TriggerLog, TriggerRecord
from .schedule import build_trigger_schedule, sample_next_trigger

__all__ = [
    "run_simulation", "simulate_flow_records", "SimStats",
    "PacketEvent", "PacketTrace", "TriggerLog", "TriggerRecord",
    "build_trigger_schedule", "sample_next_trigger",
]
