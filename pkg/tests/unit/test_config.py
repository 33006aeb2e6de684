"""Unit tests for vddp.config"""

import json

import pytest

from vddp import config
from vddp.config import (
    DEFAULT_CONFIG,
    get_accountant_settings,
    get_backend_name,
    get_challenge_mode,
    get_lprf_bit_budget,
    get_mask_degree,
    get_retain_trapdoor,
    load_config,
    save_config,
)


@pytest.fixture
def config_file(tmp_path, monkeypatch):
    """Point CONFIG_FILE at a writable temp file."""
    path = tmp_path / "vddp_config.json"
    monkeypatch.setattr(config, "CONFIG_FILE", path)
    return path


class TestLoadConfig:
    """Test configuration loading."""

    def test_defaults_without_file(self, monkeypatch):
        """Test a missing file gives the defaults plus environment."""
        monkeypatch.delenv("VDDP_GROUP_BACKEND")
        monkeypatch.delenv("VDDP_CHALLENGE_MODE")
        assert load_config() == DEFAULT_CONFIG

    def test_file_values(self, config_file, monkeypatch):
        """Test file entries override defaults."""
        monkeypatch.delenv("VDDP_GROUP_BACKEND")
        config_file.write_text(json.dumps({"group_backend": "bls12_381", "mask_degree": 3}))
        assert get_backend_name() == "bls12_381"
        assert get_mask_degree() == 3

    def test_environment_wins(self, config_file):
        """Test environment variables override the file."""
        config_file.write_text(json.dumps({"group_backend": "bls12_381", "challenge_mode": "fiat-shamir"}))
        assert get_backend_name() == "exponent"
        assert get_challenge_mode() == "interactive"

    def test_nested_accountant_merge(self, config_file):
        """Test partial accountant sections keep the other defaults."""
        config_file.write_text(json.dumps({"accountant": {"max_gamma": 10}}))
        settings = get_accountant_settings()
        assert settings["max_gamma"] == 10
        assert settings["search_nus"] == [16, 24, 32]

    def test_bad_json_falls_back(self, config_file):
        """Test an unreadable file is ignored."""
        config_file.write_text("{not json")
        assert get_lprf_bit_budget() == DEFAULT_CONFIG["lprf_bit_budget"]

    def test_invalid_environment_value(self, monkeypatch):
        """Test unparseable overrides are skipped."""
        monkeypatch.setenv("VDDP_MASK_DEGREE", "lots")
        assert get_mask_degree() == 1

    def test_trapdoor_flag(self, monkeypatch):
        """Test boolean parsing of VDDP_RETAIN_TRAPDOOR."""
        assert get_retain_trapdoor() is False
        monkeypatch.setenv("VDDP_RETAIN_TRAPDOOR", "yes")
        assert get_retain_trapdoor() is True

    def test_defaults_not_mutated(self, config_file):
        """Test loading never writes into DEFAULT_CONFIG."""
        config_file.write_text(json.dumps({"accountant": {"max_gamma": 3}}))
        load_config()
        assert DEFAULT_CONFIG["accountant"]["max_gamma"] == 24


class TestSaveConfig:
    """Test configuration saving."""

    def test_round_trip(self, config_file, monkeypatch):
        """Test saved values load back."""
        monkeypatch.delenv("VDDP_GROUP_BACKEND")
        save_config({"group_backend": "bls12_381", "seed": 42})
        loaded = load_config()
        assert loaded["seed"] == 42
        assert loaded["group_backend"] == "bls12_381"

    def test_explicit_path(self, tmp_path):
        """Test saving to a given path."""
        target = tmp_path / "other.json"
        save_config({"mask_degree": 2}, target)
        assert load_config(target)["mask_degree"] == 2
