"""End-to-end tests for the vddp command line."""

import json
from pathlib import Path

import pytest

from vddp.bench import read_csv
from vddp.cli import EXIT_OK, EXIT_SESSION_ERROR, EXIT_USAGE, main
from vddp.errors import TransportError

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


class TestAccountingCommands:
    """Test accountant, suggest and sample."""

    def test_accountant(self, capsys):
        """Test the closed-form report."""
        code, payload = _run(capsys, ["accountant", "--t", "1", "--gamma", "2", "--nu", "4"])
        assert code == EXIT_OK
        assert payload["params"]["gamma"] == 2
        assert payload["report"]["epsilon"] > 0

    def test_accountant_exact_agrees(self, capsys):
        """Test enumeration matches the closed form for unit sensitivity."""
        argv = ["accountant", "--t", "2", "--gamma", "3", "--nu", "8"]
        _, closed = _run(capsys, argv)
        _, exact = _run(capsys, argv + ["--exact"])
        assert exact["report"]["epsilon"] == pytest.approx(closed["report"]["epsilon"])

    def test_suggest(self, capsys):
        """Test a feasible search."""
        code, payload = _run(capsys, ["suggest", "--epsilon", "1", "--delta", "1e-6", "--nus", "16,24"])
        assert code == EXIT_OK
        assert payload["feasible"]
        assert payload["report"]["epsilon"] <= 1.0

    def test_suggest_infeasible(self, capsys):
        """Test an unreachable target exits with a usage error and the nearest miss."""
        argv = ["suggest", "--epsilon", "0.1", "--delta", "1e-9", "--nus", "2", "--max-gamma", "4"]
        code, payload = _run(capsys, argv)
        assert code == EXIT_USAGE
        assert payload["feasible"] is False

    def test_sample(self, capsys):
        """Test noise draws stay in the support."""
        code, payload = _run(capsys, ["sample", "--t", "1", "--gamma", "2", "--nu", "4", "-n", "25", "--seed", "3"])
        assert code == EXIT_OK
        assert len(payload["samples"]) == 25
        assert all(abs(v) <= 4 for v in payload["samples"])


class TestSessionCommands:
    """Test session subcommands."""

    def test_vrr(self, capsys):
        """Test a randomized-response session with default probabilities."""
        code, payload = _run(capsys, ["vrr", "--k", "3", "--omega-bits", "3", "--n-cli", "2"])
        assert code == EXIT_OK
        assert payload["accepted_clients"] == [0, 1]
        assert len(payload["output"]) == 3

    def test_vrr_single_class(self, capsys):
        """Test K below 2 is a usage error."""
        assert main(["vrr", "--k", "1"]) == EXIT_USAGE
        assert "at least 2" in capsys.readouterr().err

    def test_vddlm(self, capsys):
        """Test a distributed Laplace session."""
        argv = ["vddlm", "--d", "2", "--gamma", "2", "--nu", "4", "--n-cli", "2", "--mode", "fiat-shamir"]
        code, payload = _run(capsys, argv)
        assert code == EXIT_OK
        assert payload["aborted"] is False
        assert payload["accepted_servers"] == [0, 1]

    def test_run_config(self, capsys, tmp_path: Path):
        """Test a session from a config file with an excluded client and dumped transcripts."""
        argv = ["run", str(FIXTURES / "session_vddlm.json"), "--dump-dir", str(tmp_path)]
        code, payload = _run(capsys, argv)
        assert code == EXIT_OK
        assert payload["accepted_clients"] == [0, 1]
        assert payload["extra"]["true_aggregate"] == [2, 1]
        assert (tmp_path / "fixture-vddlm" / "outcome.json").exists()

    def test_run_vrr_config(self, capsys):
        """Test a three-class randomized-response config."""
        code, payload = _run(capsys, ["run", str(FIXTURES / "session_vrr.json")])
        assert code == EXIT_OK
        assert payload["extra"]["true_histogram"] == [2, 1, 1]

    def test_invalid_config(self, capsys, tmp_path: Path):
        """Test a config failing validation is a usage error."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"mechanism": "vddlm", "n_cli": 0}), encoding="utf-8")
        assert main(["run", str(path)]) == EXIT_USAGE


class TestBenchCommand:
    """Test the bench subcommand."""

    def test_bench_to_csv(self, capsys, tmp_path: Path):
        """Test a small sweep written to disk."""
        target = tmp_path / "rows.csv"
        argv = ["bench", "--mechanism", "vrr", "--epsilon", "0.5,1.0", "--omega-bits", "3",
                "--n-cli", "2", "--output", str(target)]
        code, payload = _run(capsys, argv)
        assert code == EXIT_OK
        assert payload["rows"] == 2
        assert [row.epsilon for row in read_csv(target)] == [0.5, 1.0]


class TestArguments:
    """Test argument parsing."""

    def test_unknown_flag(self):
        """Test argparse rejects malformed flags."""
        with pytest.raises(SystemExit) as exc:
            main(["accountant", "--t", "1", "--gamma", "two", "--nu", "4"])
        assert exc.value.code == 2

    def test_missing_command(self):
        """Test a subcommand is required."""
        with pytest.raises(SystemExit):
            main([])

    def test_version(self, capsys):
        """Test the version flag."""
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert "vddp" in capsys.readouterr().out


class TestSessionErrors:
    """Test channel failures."""

    def test_transport_failure(self, mocker, capsys):
        """Test a broken channel exits with a session error, not a usage error."""
        mocker.patch("vddp.cli.run_session", side_effect=TransportError("peer closed"))
        assert main(["vrr", "--n-cli", "1"]) == EXIT_SESSION_ERROR
        assert "peer closed" in capsys.readouterr().err
