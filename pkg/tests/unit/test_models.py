"""Unit tests for vddp.models"""

import pytest
from pydantic import ValidationError

from vddp.models import AdversaryStep, BenchRow, BenchSpec, SessionConfig, VddlmSettings, VrrSettings


class TestSettings:
    """Test mechanism settings."""

    def test_vddlm_defaults(self):
        """Test the default Laplace settings."""
        settings = VddlmSettings()
        assert settings.d == 1
        assert settings.allow_truncation

    def test_vddlm_scale_must_be_positive(self):
        """Test t_scale > 0."""
        with pytest.raises(ValidationError, match="t_scale must be positive"):
            VddlmSettings(t_scale="-1/2")

    def test_vrr_probabilities(self):
        """Test probabilities must match K and sum to 1."""
        with pytest.raises(ValidationError, match="expected 3 probabilities"):
            VrrSettings(k=3, probs=["1/2", "1/2"])
        with pytest.raises(ValidationError, match="sum to 1"):
            VrrSettings(k=2, probs=["1/2", "1/3"])

    def test_vrr_k_bound(self):
        """Test K >= 2."""
        with pytest.raises(ValidationError):
            VrrSettings(k=1, probs=["1"])


class TestSessionConfig:
    """Test session configuration validation."""

    def test_json_round_trip(self):
        """Test a config survives its JSON form."""
        cfg = SessionConfig(n_cli=2, adversary=[AdversaryStep(role="client", index=1, kind="invalid-data")])
        assert SessionConfig.model_validate_json(cfg.model_dump_json()) == cfg

    def test_single_block_topology(self):
        """Test every client naming the same servers."""
        cfg = SessionConfig(n_cli=2, n_ser=2, topology=[[0, 1], [1, 0]])
        assert cfg.topology == [[0, 1], [1, 0]]

    def test_overlapping_blocks(self):
        """Test partially overlapping server sets are refused."""
        with pytest.raises(ValidationError, match="identical or disjoint"):
            SessionConfig(n_cli=2, n_ser=3, topology=[[0, 1], [1, 2]])

    def test_disjoint_blocks_need_vrr(self):
        """Test several blocks are refused for the Laplace mechanism."""
        with pytest.raises(ValidationError, match="single client block"):
            SessionConfig(n_cli=2, n_ser=2, topology=[[0], [1]])
        cfg = SessionConfig(mechanism="vrr", n_cli=2, n_ser=2, topology=[[0], [1]])
        assert cfg.mechanism == "vrr"

    def test_unknown_server(self):
        """Test topology indices must exist."""
        with pytest.raises(ValidationError, match="unknown servers"):
            SessionConfig(n_cli=1, n_ser=1, topology=[[3]])

    def test_data_shape(self):
        """Test vddlm data must be n_cli vectors of length d."""
        with pytest.raises(ValidationError, match="n_cli vectors"):
            SessionConfig(n_cli=2, vddlm=VddlmSettings(d=2, data=[[1, 0]]))
        with pytest.raises(ValidationError, match="one class per client"):
            SessionConfig(mechanism="vrr", n_cli=2, vrr=VrrSettings(data=[0]))

    def test_adversary_index(self):
        """Test adversaries must target existing parties."""
        with pytest.raises(ValidationError, match="adversary targets server 5"):
            SessionConfig(n_ser=2, adversary=[AdversaryStep(role="server", index=5, kind="bit-flip")])

    def test_transport_choices(self):
        """Test unknown transports are refused."""
        with pytest.raises(ValidationError):
            SessionConfig(transport="carrier-pigeon")


class TestBenchModels:
    """Test bench spec and rows."""

    def test_empty_axis(self):
        """Test sweep axes cannot be empty."""
        with pytest.raises(ValidationError, match="sweep axis d is empty"):
            BenchSpec(d=[])

    def test_row_deterministic_part(self):
        """Test timings are dropped from the comparable part."""
        row = BenchRow(mechanism="vrr", d=1, epsilon=1.0, omega_bits=4, n_ser=1, n_cli=3, repetition=0,
                       t_prove_ms=1.5, t_verify_ms=0.5, bytes=100)
        data = row.deterministic()
        assert "t_prove_ms" not in data
        assert data["bytes"] == 100

    def test_row_from_csv_strings(self):
        """Test rows validate from CSV string values."""
        row = BenchRow.model_validate({
            "mechanism": "vddlm", "d": "2", "epsilon": "0.5", "omega_bits": "0", "n_ser": "2", "n_cli": "3",
            "repetition": "1", "t_prove_ms": "3.0", "t_verify_ms": "1.0", "bytes": "512", "accepted": "True",
        })
        assert row.d == 2
        assert row.accepted is True
