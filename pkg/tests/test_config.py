"""
Tests for tracebound configuration
"""

import json
import os
import tempfile

import pytest

from tracebound.config import RunConfig, create_sample_config, load_config
from tracebound.exceptions import ConfigurationError

ENV_VARS = ("REPRO_PRECISION", "TRACEBOUND_GRID_N", "TRACEBOUND_SEED", "LOG_LEVEL", "TRACEBOUND_CONFIG_PATH")


@pytest.fixture
def clean_env(monkeypatch):
    for name in ENV_VARS:
        monkeypatch.delenv(name, raising=False)
    return monkeypatch


class TestRunConfig:
    """Test RunConfig model"""

    def test_defaults(self):
        config = RunConfig()
        assert config.precision_digits == 60
        assert config.grid_n == 257
        assert config.output_mode == "text"
        assert config.tol_sep == pytest.approx(1e-11)

    def test_precision_floor(self):
        with pytest.raises(ValueError):
            RunConfig(precision_digits=20)

    def test_output_mode_normalization(self):
        assert RunConfig(output_mode=" JSON ").output_mode == "json"
        with pytest.raises(ValueError):
            RunConfig(output_mode="yaml")

    def test_log_level(self):
        assert RunConfig(log_level="debug").log_level == "DEBUG"
        with pytest.raises(ValueError):
            RunConfig(log_level="chatty")

    def test_exact_lp_tolerance(self):
        assert RunConfig(tol_lp=0).tol_sep == pytest.approx(1e-11)
        assert RunConfig(tol_sep=1e-6).tol_sep == 1e-6

    def test_unknown_field(self):
        with pytest.raises(ValueError):
            RunConfig(grid_size=33)


def test_create_sample_config():
    """Test creating a sample configuration"""
    with tempfile.TemporaryDirectory() as temp_dir:
        sample_path = os.path.join(temp_dir, "nested", "config.json")
        create_sample_config(sample_path)

        assert os.path.exists(sample_path)

        with open(sample_path, "r") as f:
            data = json.load(f)

        assert data["precision_digits"] == 60
        assert "tol_sep" not in data
        assert RunConfig(**data) == RunConfig()


def test_load_config_missing_file(clean_env):
    """An explicitly named file must exist"""
    with pytest.raises(FileNotFoundError):
        load_config("nonexistent_file.json")


def test_load_config_missing_default_file(clean_env, tmp_path):
    """A missing default file falls back to the defaults"""
    clean_env.setenv("TRACEBOUND_CONFIG_PATH", str(tmp_path / "absent.json"))
    assert load_config() == RunConfig()


def test_load_config_precedence(clean_env, tmp_path):
    """File, then environment, then explicit overrides"""
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"precision_digits": 40, "grid_n": 65, "seed": 3}))
    clean_env.setenv("TRACEBOUND_GRID_N", "129")

    config = load_config(str(config_path), seed=11, precision_digits=None)
    assert config.precision_digits == 40
    assert config.grid_n == 129
    assert config.seed == 11


def test_load_config_precision_env(clean_env, tmp_path):
    clean_env.setenv("REPRO_PRECISION", "80")
    config_path = tmp_path / "config.json"
    config_path.write_text("{}")
    assert load_config(str(config_path)).precision_digits == 80


def test_load_config_invalid_values(clean_env, tmp_path):
    """Validation failures surface as ConfigurationError"""
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"grid_n": 4}))
    with pytest.raises(ConfigurationError, match="grid_n"):
        load_config(str(config_path))
