"""Trigger schedule generation."""

from __future__ import annotations

import numpy as np

from ..config import SimConfig


def sample_next_trigger(config: SimConfig, rng: np.random.Generator) -> float:
    """Seconds until the next shuffle trigger.

    Fixed mode returns the configured interval. Random mode draws from a
    normal truncated to [lo, hi] with mean at the midpoint and standard
    deviation a quarter of the range, by rejection.
    """
    if config.trigger_mode == "fixed":
        return config.interval_s
    lo, hi = config.random_lo_s, config.random_hi_s
    mean = 0.5 * (lo + hi)
    sd = 0.25 * (hi - lo)
    while True:
        x = rng.normal(mean, sd)
        if lo <= x <= hi:
            return float(x)


def build_trigger_schedule(config: SimConfig, rng: np.random.Generator) -> np.ndarray:
    """All trigger times inside [0, observation window).

    The first trigger fires at t=0, so the sniffed window always opens on a
    fresh address epoch.
    """
    if config.trigger_mode == "fixed":
        n = int(np.ceil(config.observation_window_s / config.interval_s))
        return np.arange(n, dtype=np.float64) * config.interval_s
    times = [0.0]
    t = 0.0
    while True:
        t += sample_next_trigger(config, rng)
        if t >= config.observation_window_s:
            break
        times.append(t)
    return np.asarray(times, dtype=np.float64)
