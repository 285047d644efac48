"""Trigger scheduling: fixed arithmetic and the truncated-normal draw."""

import numpy as np
import pytest

from mtdprobe.config import SimConfig
from mtdprobe.simulate.schedule import build_trigger_schedule, sample_next_trigger


def test_fixed_mode_returns_interval():
    cfg = SimConfig(interval_s=60.0)
    assert sample_next_trigger(cfg, np.random.default_rng(0)) == 60.0


def test_fixed_schedule_covers_window_exactly():
    cfg = SimConfig(interval_s=180.0, observation_window_s=7200.0)
    times = build_trigger_schedule(cfg, np.random.default_rng(0))
    assert len(times) == 40
    assert times[0] == 0.0
    assert times[-1] == 7020.0
    assert np.all(np.diff(times) == 180.0)


def test_random_samples_respect_truncation():
    cfg = SimConfig(trigger_mode="random", random_lo_s=15.0, random_hi_s=300.0)
    rng = np.random.default_rng(1)
    draws = np.array([sample_next_trigger(cfg, rng) for _ in range(10_000)])
    assert draws.min() >= 15.0
    assert draws.max() <= 300.0


def test_random_sample_mean_matches_truncated_normal():
    # Symmetric truncation leaves the mean at the midpoint: (15+300)/2.
    cfg = SimConfig(trigger_mode="random", random_lo_s=15.0, random_hi_s=300.0)
    rng = np.random.default_rng(2)
    draws = np.array([sample_next_trigger(cfg, rng) for _ in range(10_000)])
    assert abs(draws.mean() - 157.5) <= 3.0


def test_random_schedule_strictly_increasing():
    cfg = SimConfig(trigger_mode="random", observation_window_s=3600.0)
    times = build_trigger_schedule(cfg, np.random.default_rng(3))
    assert times[0] == 0.0
    assert np.all(np.diff(times) >= 15.0)
    assert times[-1] < 3600.0
