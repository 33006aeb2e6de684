"""End-to-end tests for benchmark sweeps."""

import math
from fractions import Fraction
from pathlib import Path

import pytest

from vddp.bench import bench_columns, default_gamma, loglog_slope, read_csv, rr_probabilities, run_bench, write_csv
from vddp.models import BenchSpec


@pytest.fixture
def vddlm_spec():
    return BenchSpec(mechanism="vddlm", d=[1, 2], epsilon=[1.0], nus=[4], gamma=2, n_ser=[2], n_cli=[2], seed=3)


class TestHelpers:
    """Test sweep helpers."""

    def test_default_gamma(self):
        """Test the support covers t * ln(2/delta)."""
        gamma = default_gamma(Fraction(1), 1e-6)
        assert 2 ** gamma >= math.log(2e6)
        assert 2 ** (gamma - 1) < math.log(2e6)

    def test_default_gamma_cap(self):
        """Test the level cap."""
        assert default_gamma(Fraction(10 ** 9), 1e-12, max_gamma=5) == 5

    def test_rr_probabilities(self):
        """Test the keep probability is e^eps / (1 + e^eps)."""
        keep, flip = (Fraction(p) for p in rr_probabilities(1.0))
        assert keep + flip == 1
        assert float(keep) == pytest.approx(math.e / (1 + math.e), abs=1e-6)

    def test_loglog_slope(self):
        """Test a power law recovers its exponent."""
        xs = [1, 2, 4, 8, 16]
        assert loglog_slope(xs, [3 * x ** 2 for x in xs]) == pytest.approx(2.0)

    def test_loglog_slope_needs_points(self):
        """Test one point is not enough."""
        with pytest.raises(ValueError, match="at least two points"):
            loglog_slope([1], [1])


class TestSweeps:
    """Test full sweeps."""

    def test_vddlm_rows(self, vddlm_spec):
        """Test one row per cell with costs filled in."""
        rows = run_bench(vddlm_spec)
        assert [row.d for row in rows] == [1, 2]
        assert all(row.accepted for row in rows)
        assert all(row.bytes > 0 and row.verifier_ops > 0 for row in rows)
        assert rows[1].n_lap == rows[0].n_lap
        assert rows[1].bytes > rows[0].bytes

    def test_sweep_is_reproducible(self, vddlm_spec):
        """Test everything but timings repeats under the same seed."""
        first = [row.deterministic() for row in run_bench(vddlm_spec)]
        second = [row.deterministic() for row in run_bench(vddlm_spec)]
        assert first == second

    def test_vrr_repetitions(self):
        """Test repetitions multiply the rows."""
        spec = BenchSpec(mechanism="vrr", epsilon=[1.0], omega_bits=[2, 3], n_cli=[2], repetitions=2)
        rows = run_bench(spec)
        assert len(rows) == 4
        assert [row.omega_bits for row in rows] == [2, 2, 3, 3]
        assert all(row.delta == 0.0 for row in rows)

    def test_csv(self, tmp_path: Path):
        """Test rows survive a CSV file with the published columns."""
        spec = BenchSpec(mechanism="vrr", epsilon=[0.5], omega_bits=[3], n_cli=[2], output=str(tmp_path / "out.csv"))
        rows = run_bench(spec)
        header = (tmp_path / "out.csv").read_text(encoding="utf-8").splitlines()[0]
        assert header.split(",") == bench_columns()
        assert [r.deterministic() for r in read_csv(tmp_path / "out.csv")] == [r.deterministic() for r in rows]

    def test_write_creates_parents(self, tmp_path: Path):
        """Test nested output directories are created."""
        target = write_csv([], tmp_path / "a" / "b.csv")
        assert target.exists()


class TestScaling:
    """Test the cost shapes of each mechanism."""

    @pytest.mark.slow
    def test_vddlm_prover_linear_in_bits(self):
        """Test proving time grows linearly in d * n_lap."""
        spec = BenchSpec(mechanism="vddlm", d=[2, 4, 8, 16, 32, 64], epsilon=[1.0], nus=[4], gamma=2,
                         n_ser=[1], n_cli=[1], repetitions=2, seed=7)
        rows = run_bench(spec)
        fastest = {}
        for row in rows:
            key = row.d * row.n_lap
            fastest[key] = min(fastest.get(key, math.inf), row.t_prove_ms)
        xs = sorted(fastest)
        assert len(xs) == 6
        assert 0.8 <= loglog_slope(xs, [fastest[x] for x in xs]) <= 1.3

    def test_vrr_cost_independent_of_domain(self):
        """Test bytes within 10% and identical verifier work for |Ω| of 2^8 and 2^12."""
        spec = BenchSpec(mechanism="vrr", epsilon=[1.0], omega_bits=[8, 12], n_cli=[3], seed=11)
        small, large = run_bench(spec)
        assert small.accepted and large.accepted
        assert max(small.bytes, large.bytes) / min(small.bytes, large.bytes) < 1.1
        assert small.verifier_ops == large.verifier_ops > 0
