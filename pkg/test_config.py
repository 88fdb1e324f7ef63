#!/usr/bin/env python3
"""
Tests for run configuration loading and validation
"""

import math
from pathlib import Path

import numpy as np
import pytest
import yaml

from config import ENV_OVERRIDES, RunConfig
from exceptions import ConfigError


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for variable in ENV_OVERRIDES:
        monkeypatch.delenv(variable, raising=False)


def test_defaults():
    config = RunConfig()
    assert (config.p_s, config.p_d) == (0.99, 0.98)
    assert (config.sigma_x, config.sigma_y, config.sigma_o, config.delta_t) == (2.33, 2.33, 0.2, 1.0)
    filter_config = config.filter_config()
    assert (filter_config.prune_T, filter_config.merge_U, filter_config.J_max) == (1e-5, 0.004, 200)
    ospa_params = config.ospa_params()
    assert (ospa_params.cutoff_c, ospa_params.order_l) == (30.0, 1.0)
    assert config.seed == 2013


def test_shipped_config_matches_defaults():
    shipped = RunConfig.load(str(Path(__file__).parent / "config.yaml"))
    assert shipped == RunConfig()


def test_missing_file_writes_defaults(tmp_path):
    path = tmp_path / "config.yaml"
    config = RunConfig.load(str(path))
    assert path.exists()
    assert config == RunConfig()
    assert RunConfig.load(str(path)) == config


def test_yaml_syntax_error_names_location(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("p_d: 0.9\nsigma_o: [0.2\n")
    with pytest.raises(ConfigError, match="line"):
        RunConfig.load(str(path))


def test_unknown_and_invalid_keys(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump({"p_detect": 0.9}))
    with pytest.raises(ConfigError, match="p_detect"):
        RunConfig.load(str(path))

    path.write_text(yaml.safe_dump({"p_d": 1.5}))
    with pytest.raises(ConfigError, match="p_d"):
        RunConfig.load(str(path))

    path.write_text("- just\n- a list\n")
    with pytest.raises(ConfigError):
        RunConfig.load(str(path))


def test_cross_field_validation():
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({"scenario": "steady", "scenario_tracks": 80})
    with pytest.raises(ConfigError):
        RunConfig.from_mapping({"max_components": 2})


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("CPHD_LOG_LEVEL", "DEBUG")
    monkeypatch.setenv("CPHD_OUTPUT_DIRECTORY", "elsewhere")
    config = RunConfig.from_mapping({"log_level": "WARNING"})
    assert config.log_level == "DEBUG"
    assert config.output_directory == "elsewhere"


def test_override_ignores_none():
    config = RunConfig().override(p_d=0.5, seed=None, ospa_cutoff=10.0)
    assert config.p_d == 0.5
    assert config.seed == 2013
    assert config.ospa_cutoff == 10.0
    with pytest.raises(ConfigError):
        RunConfig().override(p_d=2.0)


def test_infinite_ospa_order(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("ospa_order: .inf\n")
    assert RunConfig.load(str(path)).ospa_params().is_infinite_order


def test_model_builders():
    config = RunConfig()
    motion = config.motion_model()
    assert motion.p_S == 0.99
    np.testing.assert_allclose(motion.Q[0, 0], 0.25 * 2.33**2)
    measurement = config.measurement_model()
    np.testing.assert_allclose(measurement.R, 0.04 * np.eye(2))
    birth = config.birth_model()
    assert len(birth.intensity) == 4
    assert birth.intensity.total_mass == pytest.approx(1.0)
    assert config.linking_gate() == pytest.approx(7.6)
    assert RunConfig(link_gate=3.0).linking_gate() == 3.0


def test_scenario_selection():
    steady = RunConfig(scenario="steady", scenario_tracks=9, scenario_duration=20).scenario_spec()
    assert len(steady.birth_events) == 9 and steady.duration == 20
    assert RunConfig(scenario="empty_interval").scenario_spec().duration == 60
    standard = RunConfig().scenario_spec()
    assert len(standard.birth_events) == 12
    assert standard.motion.sigma_x == 0.25
    assert math.isclose(standard.p_D, 0.98)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
