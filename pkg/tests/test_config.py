"""Configuration validation diagnostics."""

import pytest

from mtdprobe.config import SimConfig
from mtdprobe.errors import ConfigError


def test_defaults_valid():
    SimConfig()


@pytest.mark.parametrize("field,value", [
    ("interval_s", 0.0),
    ("interval_s", -5.0),
    ("observation_window_s", 0.0),
    ("lambda_total", 0.0),
    ("n_clients", 0),
    ("n_servers", 0),
    ("hop_latency_s", -0.1),
    ("controller_rtt_s", -1.0),
    ("mechanism", "XYZ"),
    ("trigger_mode", "sometimes"),
    ("webpage_min_bytes", 5_000_000.0),
    ("stale_retry_timeout_s", 0.0),
    ("link_bandwidth_bps", 0.0),
    ("seed", -1),
])
def test_invalid_field_is_named(field, value):
    with pytest.raises(ConfigError) as err:
        SimConfig(**{field: value})
    assert field.split("_")[0] in str(err.value) or field in str(err.value)


def test_random_bounds_checked():
    with pytest.raises(ConfigError, match="random_lo_s"):
        SimConfig(trigger_mode="random", random_lo_s=300.0, random_hi_s=15.0)


def test_pei_lead_must_fit_interval():
    with pytest.raises(ConfigError, match="pei_lead_s"):
        SimConfig(mechanism="PEI", interval_s=5.0, pei_lead_s=10.0)


def test_with_revalidates():
    cfg = SimConfig()
    with pytest.raises(ConfigError):
        cfg.with_(interval_s=-1.0)


def test_round_trip_dict():
    cfg = SimConfig(interval_s=60.0, seed=9)
    assert SimConfig.from_dict(cfg.to_dict()) == cfg


def test_unknown_fields_rejected():
    with pytest.raises(ConfigError, match="unknown"):
        SimConfig.from_dict({"intervals": 60})


def test_oti_install_duration_formula():
    cfg = SimConfig(mechanism="OTI", n_clients=1, n_servers=1,
                    n_switches_on_path=2, rule_install_s=0.005)
    assert cfg.oti_install_duration_s == pytest.approx(0.02)
