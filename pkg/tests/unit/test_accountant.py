"""Unit tests for vddp.accountant"""

import math
from fractions import Fraction

import pytest

from vddp.accountant import (
    expected_l1,
    laplace_dp_closed_form,
    laplace_dp_exact,
    rr_epsilon,
    step_ratios,
    suggest_params,
)
from vddp.errors import InfeasibleParamsError, ParameterError, PrecisionCollapseError
from vddp.randomness import derive_bernoulli, noise_pmf, point_mass


class TestLaplaceAccounting:
    """Test (epsilon, delta) of the Laplace circuit."""

    def test_closed_form_matches_exact(self, small_params):
        """Test the step-ratio bound is tight for unit sensitivity."""
        closed = laplace_dp_closed_form(small_params, 1)
        exact = laplace_dp_exact(small_params, 1)
        assert closed.max_ratio == exact.max_ratio
        assert closed.delta == exact.delta
        assert abs(float(closed.epsilon) - float(exact.epsilon)) < 1e-12

    def test_delta_is_boundary_mass(self, small_params):
        """Test delta equals the mass at -2^gamma."""
        report = laplace_dp_closed_form(small_params, 1)
        assert report.delta == point_mass(small_params, -4)
        assert report.witness["escaping"] == [-4]

    def test_higher_sensitivity(self, small_params):
        """Test the window product equals the brute-force epsilon for sensitivity 2."""
        closed = laplace_dp_closed_form(small_params, 2)
        exact = laplace_dp_exact(small_params, 2)
        assert closed.max_ratio == exact.max_ratio
        assert closed.delta == exact.delta == point_mass(small_params, -4) + point_mass(small_params, -3)

    def test_zero_sensitivity(self, small_params):
        """Test Δ = 0 costs nothing."""
        report = laplace_dp_closed_form(small_params, 0)
        assert float(report.epsilon) == 0.0
        assert report.delta == 0

    def test_negative_sensitivity(self, small_params):
        """Test Δ < 0 raises."""
        with pytest.raises(ParameterError, match="non-negative"):
            laplace_dp_closed_form(small_params, -1)

    @pytest.mark.parametrize("t,gamma,delta_sens", [(1, 2, 3), (2, 4, 3), (3, 5, 5), (1, 3, 8), (10, 6, 4)])
    def test_large_sensitivity_matches_exact(self, t, gamma, delta_sens):
        """Test sensitivities beyond 2 on both enumeration paths."""
        params = derive_bernoulli(t, gamma, 12, allow_truncation=True)
        closed = laplace_dp_closed_form(params, delta_sens)
        exact = laplace_dp_exact(params, delta_sens)
        assert closed.max_ratio == exact.max_ratio
        assert closed.delta == exact.delta

    def test_witness_achieves_ratio(self):
        """Test the reported r realizes the ratio in its direction."""
        params = derive_bernoulli(3, 4, 10)
        report = laplace_dp_closed_form(params, 2)
        r = report.witness["r"]
        other = r - 2 if report.witness["direction"] == "D/D'" else r + 2
        assert point_mass(params, r) / point_mass(params, other) == report.max_ratio

    def test_epsilon_decreases_with_scale(self):
        """Test a wider Laplace scale never costs more privacy."""
        eps = [float(laplace_dp_closed_form(derive_bernoulli(t, 8, 24, allow_truncation=True), 1).epsilon) for t in (1, 10, 100)]
        assert eps[0] >= eps[1] >= eps[2]

    def test_fine_coins_approach_one_over_t(self):
        """Test epsilon tends to Δ/t as precision grows."""
        params = derive_bernoulli(2, 4, 24)
        report = laplace_dp_closed_form(params, 1)
        assert abs(float(report.epsilon) - 0.5) < 1e-3

    def test_step_ratios(self, small_params):
        """Test a_z against the pmf."""
        a_z, a_i = step_ratios(small_params)
        pmf = noise_pmf(small_params)
        assert a_z == pmf[0] / pmf[1]
        assert a_i[0] == pmf[2] / pmf[1]
        assert len(a_i) == small_params.gamma

    def test_expected_l1(self, small_params):
        """Test the closed form against the pmf."""
        assert expected_l1(small_params) == noise_pmf(small_params).expected_abs()

    def test_exact_bound(self, small_params):
        """Test the brute-force oracle refuses large gamma."""
        with pytest.raises(ParameterError, match="exact oracle bound"):
            laplace_dp_exact(small_params, 1, exact_max_gamma=1)

    def test_report_dict(self, small_params):
        """Test the JSON form carries exact and decimal values."""
        data = laplace_dp_closed_form(small_params, 1, n_ser=3).to_dict()
        assert data["ddp_tolerance"] == 2
        assert Fraction(data["delta_exact"]) == point_mass(small_params, -4)
        assert data["method"] == "closed-form"


GRID = [
    (t, gamma, nu, delta_sens)
    for t in (1, 10, 100)
    for gamma in range(2, 9)
    for nu in (8, 16, 24)
    for delta_sens in (1, 2)
]


def _grid_params(t, gamma, nu):
    try:
        return derive_bernoulli(t, gamma, nu, allow_truncation=True)
    except PrecisionCollapseError:
        pytest.skip("zeroing coin collapses at this precision")


class TestAccountingGrid:
    """Test closed forms against the exact pmf over a parameter grid."""

    @pytest.mark.parametrize("t,gamma,nu,delta_sens", GRID)
    def test_closed_form_is_exact(self, t, gamma, nu, delta_sens):
        """Test epsilon and delta agree with the brute-force oracle."""
        params = _grid_params(t, gamma, nu)
        closed = laplace_dp_closed_form(params, delta_sens)
        exact = laplace_dp_exact(params, delta_sens)
        assert closed.delta == exact.delta
        assert closed.max_ratio == exact.max_ratio
        assert abs(float(closed.epsilon) - float(exact.epsilon)) < 1e-9

    @pytest.mark.parametrize("t,gamma,nu", sorted({g[:3] for g in GRID}))
    def test_expected_l1_identity(self, t, gamma, nu):
        """Test E|noise| against the enumerated pmf."""
        params = _grid_params(t, gamma, nu)
        assert expected_l1(params) == noise_pmf(params).expected_abs()


class TestRandomizedResponse:
    """Test randomized response epsilon."""

    def test_ratio(self):
        """Test ε = log(max / min) for two classes."""
        assert abs(float(rr_epsilon([12, 4], 16)) - math.log(3)) < 1e-12

    def test_truthful_class_not_in_minimum(self):
        """Test only lying classes bound the denominator."""
        assert abs(float(rr_epsilon([2, 8, 6], 16)) - math.log(Fraction(8, 6))) < 1e-12

    def test_single_class(self):
        """Test one class is rejected."""
        with pytest.raises(ParameterError, match="at least two classes"):
            rr_epsilon([16], 16)

    def test_uniform(self):
        """Test equal multiplicities give zero."""
        assert float(rr_epsilon([4, 4, 4, 4], 16)) == 0.0

    def test_sum_mismatch(self):
        """Test multiplicities must cover Ω."""
        with pytest.raises(ParameterError, match="expected 16"):
            rr_epsilon([3, 4], 16)

    def test_zero_class(self):
        """Test a class that never appears gives infinite epsilon."""
        with pytest.raises(ParameterError, match="infinite epsilon"):
            rr_epsilon([16, 0], 16)


class TestSuggest:
    """Test the parameter search."""

    def test_meets_targets(self):
        """Test the suggestion satisfies (1, 1e-6)."""
        params = suggest_params(1.0, 1e-6, nus=[16, 24])
        report = laplace_dp_closed_form(params, 1)
        assert float(report.epsilon) <= 1.0
        assert report.delta <= Fraction(1e-6)

    def test_tight_delta_verified_exactly(self):
        """Test a (1, 1e-10) suggestion against the exact oracle."""
        params = suggest_params(1.0, 1e-10)
        report = laplace_dp_exact(params, 1)
        assert float(report.epsilon) <= 1.0
        assert report.delta <= Fraction(1e-10)

    def test_unreachable_targets(self):
        """Test (1e-9, 1e-30) is out of range."""
        with pytest.raises(InfeasibleParamsError, match="no feasible parameters"):
            suggest_params(1e-9, 1e-30)

    def test_cost_falls_as_delta_loosens(self):
        """Test n_lap never grows as the delta target is relaxed."""
        costs = [suggest_params(1.0, d).n_lap for d in (1e-10, 1e-8, 1e-6, 1e-4, 1e-2)]
        assert costs == sorted(costs, reverse=True)

    def test_infeasible(self):
        """Test two-bit coins cannot reach tight targets."""
        with pytest.raises(InfeasibleParamsError, match="no feasible parameters"):
            suggest_params(0.1, 1e-9, nus=[2], max_gamma=4)

    def test_bad_targets(self):
        """Test non-positive targets raise."""
        with pytest.raises(ParameterError, match="targets must be positive"):
            suggest_params(0, 1e-6)
