"""Unit tests for vddp.vrr"""

import math
from fractions import Fraction

import numpy as np
import pytest

from vddp.algebra import PrimeField, poly_eval, subgroup_domain
from vddp.errors import ParameterError
from vddp.rng import Rng
from vddp.sigma import simulate, verify_simulated
from vddp.vrr import (
    VrrStatement,
    build_scheme,
    build_scheme_on_domain,
    channel_matrix,
    estimate_variance,
    estimator_matrix,
    histogram_estimate,
    largest_remainder,
    nearest_admissible_k,
    new_client,
    observed_histogram,
    response_histogram,
    rr_respond,
    verify_vrr,
    vrr_protocol,
)


@pytest.fixture(scope="module")
def scheme():
    """Binary randomized response keeping the class with probability 3/4 on 16 points."""
    return build_scheme(2, ["3/4", "1/4"], 4)


class TestScheme:
    """Test scheme construction."""

    def test_multiplicities(self, scheme):
        """Test A_k and the realized epsilon."""
        assert scheme.A == (12, 4)
        assert scheme.omega_size == 16
        assert scheme.probabilities == [Fraction(3, 4), Fraction(1, 4)]
        assert abs(float(scheme.realized_eps) - math.log(3)) < 1e-12

    def test_polynomial_hits_evaluations(self, scheme):
        """Test F(omega^i) is the i-th table entry."""
        for i in range(scheme.omega_size):
            assert poly_eval(scheme.F_coeffs, scheme.domain.element(i)) == scheme.evaluations[i]

    def test_class_encoding(self, scheme):
        """Test chi^k round-trips and non-members are refused."""
        for k in range(scheme.K):
            assert scheme.class_of(scheme.encode(k)) == k
        assert not scheme.in_subgroup(2)
        with pytest.raises(ParameterError, match="not in the response subgroup"):
            scheme.class_of(2)

    def test_each_coin_randomizes_alone(self, scheme):
        """Test fixing either coin leaves the full multiplicities."""
        assert response_histogram(scheme, i_sigma=5) == list(scheme.A)
        assert response_histogram(scheme, i_phi=11) == list(scheme.A)
        with pytest.raises(ParameterError, match="exactly one"):
            response_histogram(scheme)

    def test_inadmissible_k(self):
        """Test K must divide p - 1, suggesting a neighbour."""
        with pytest.raises(ParameterError, match="nearest admissible K is 4"):
            build_scheme(5, ["1/5"] * 5, 4)
        assert nearest_admissible_k(5) == 4

    @pytest.mark.parametrize(
        "K, probs, match",
        [
            (1, ["1"], "at least 2"),
            (2, ["1/2"], "expected 2 probabilities"),
            (2, ["1/2", "1/4"], "sum to 1"),
            (2, ["1/1000", "999/1000"], "underflow"),
        ],
    )
    def test_invalid_schemes(self, K, probs, match):
        """Test malformed requests."""
        with pytest.raises(ParameterError, match=match):
            build_scheme_on_domain(K, probs, subgroup_domain(4, PrimeField(97)))

    def test_toy_field(self):
        """Test a ternary scheme over an order-6 subgroup of F_97."""
        field_ = PrimeField(97)
        scheme = build_scheme_on_domain(3, ["1/3", "1/3", "1/3"], subgroup_domain(6, field_))
        assert scheme.A == (2, 2, 2)
        assert pow(scheme.chi, 3, 97) == 1
        assert float(scheme.realized_eps) == 0.0

    def test_largest_remainder(self):
        """Test rounding keeps the total."""
        assert largest_remainder([Fraction(1, 3)] * 3, 16) == [6, 5, 5]


class TestVrrProof:
    """Test the client proof for one response."""

    def _client(self, scheme, pp, k=1, seed=1):
        return new_client(scheme, k, pp, Rng(seed))

    def test_honest_accepts(self, scheme, pp, rng):
        """Test an honest response verifies and matches rr_respond."""
        state = self._client(scheme, pp)
        accepted, y, _ = vrr_protocol(state, scheme, state.com, state.psi, 7, pp, rng)
        assert accepted
        assert y == rr_respond(scheme, state, 7)
        assert scheme.class_of(y) in (0, 1)

    def test_fixed_coin(self, scheme, pp):
        """Test the response follows the table at i_sigma + i_phi."""
        state = new_client(scheme, 0, pp, Rng(2), i_sigma=3)
        y = rr_respond(scheme, state, 5)
        assert y == scheme.evaluations[8]

    @pytest.mark.parametrize("flag", ["vrr.y", "vrr.com_z", "evsc.quotient", "prod.response"])
    def test_tampering_rejects(self, scheme, pp, rng, flag):
        """Test each deviation is caught."""
        state = self._client(scheme, pp)
        accepted, _, _ = vrr_protocol(state, scheme, state.com, state.psi, 2, pp, rng, tamper=frozenset({flag}))
        assert not accepted

    def test_input_outside_subgroup(self, scheme, pp, rng):
        """Test x = 2 cannot produce a valid response."""
        state = self._client(scheme, pp)
        state.x = 2
        state.com = pp.backend.msm([pp.g, pp.h], [2, state.r_x])
        accepted, _, _ = vrr_protocol(state, scheme, state.com, state.psi, 2, pp, rng)
        assert not accepted

    def test_coin_outside_domain(self, scheme, pp, rng):
        """Test a private coin off the domain is caught."""
        state = self._client(scheme, pp)
        state.sigma_point = pp.field.generator
        state.psi = pp.backend.msm([pp.g, pp.h], [state.sigma_point, state.r_sigma])
        accepted, _, _ = vrr_protocol(state, scheme, state.com, state.psi, 2, pp, rng)
        assert not accepted

    def test_published_response_must_match(self, scheme, pp, rng):
        """Test the proof is bound to the response the verifier saw."""
        state = self._client(scheme, pp)
        accepted, y, tr = vrr_protocol(state, scheme, state.com, state.psi, 4, pp, rng)
        assert accepted
        other = scheme.encode(scheme.class_of(y) + 1)
        stmt = VrrStatement(state.com, state.psi, 4, y=other)
        assert not verify_vrr(tr.reader(), stmt, scheme, pp)

    def test_simulator(self, scheme, pp, rng):
        """Test a transcript built from public values alone verifies."""
        state = self._client(scheme, pp)
        y = rr_respond(scheme, state, 9)
        stmt = VrrStatement(state.com, state.psi, 9, y=y)
        tr = simulate("vrr", stmt, pp, rng, scheme=scheme)
        assert verify_simulated("vrr", tr, stmt, pp, scheme=scheme)

    def test_simulator_needs_response(self, scheme, pp, rng):
        """Test y is required."""
        state = self._client(scheme, pp)
        with pytest.raises(ParameterError, match="published response"):
            simulate("vrr", VrrStatement(state.com, state.psi, 1), pp, rng, scheme=scheme)


class TestEstimation:
    """Test histogram estimation."""

    def test_channel_columns_are_distributions(self):
        """Test every true class maps to a distribution."""
        M = channel_matrix([12, 4], 16)
        assert all(sum(M[kp][k] for kp in range(2)) == 1 for k in range(2))

    def test_unbiased_on_expected_counts(self):
        """Test inverting the expected observation recovers the truth."""
        assert histogram_estimate([9, 7], [12, 4], 16) == [10, 6]

    def test_length_mismatch(self):
        """Test histograms must cover every class."""
        with pytest.raises(ParameterError, match="differ in length"):
            histogram_estimate([1, 2, 3], [12, 4], 16)

    def test_uniform_channel_is_singular(self):
        """Test a channel that forgets the input cannot be inverted."""
        with pytest.raises(ParameterError, match="singular"):
            histogram_estimate([4, 4], [8, 8], 16)

    def test_variance_grows_with_noise(self):
        """Test flatter channels give noisier estimates."""
        sharp = estimate_variance([10, 6], [15, 1], 16)
        flat = estimate_variance([10, 6], [9, 7], 16)
        assert all(v > 0 for v in sharp)
        assert all(f > s for f, s in zip(flat, sharp))

    def test_observed_histogram(self, scheme):
        """Test responses are counted per class."""
        responses = [scheme.encode(0)] * 3 + [scheme.encode(1)]
        assert observed_histogram(scheme, responses) == [3, 1]


def _lying_probs(K):
    return [Fraction(3, 4)] + [Fraction(1, 4 * (K - 1))] * (K - 1)


class TestResponseDistribution:
    """Test the response distribution with either coin fixed."""

    @pytest.mark.parametrize("m", [4, 8])
    @pytest.mark.parametrize("K", [2, 4])
    def test_fixed_coin_gives_exact_distribution(self, pp, m, K):
        """Test ten random coins on each side reproduce A exactly."""
        scheme = build_scheme(K, _lying_probs(K), m)
        draw = Rng(100 * K + m)
        n = scheme.omega_size
        for _ in range(10):
            assert response_histogram(scheme, i_sigma=draw.index(n)) == list(scheme.A)
            assert response_histogram(scheme, i_phi=draw.index(n)) == list(scheme.A)

    @pytest.mark.parametrize("K", [2, 4])
    def test_client_responses_shift_by_true_class(self, pp, K):
        """Test y / x over every public coin follows A for a fixed private coin."""
        scheme = build_scheme(K, _lying_probs(K), 4)
        draw = Rng(200 + K)
        for _ in range(10):
            k = draw.index(K)
            state = new_client(scheme, k, pp, draw, i_sigma=draw.index(scheme.omega_size))
            counts = [0] * K
            for i_phi in range(scheme.omega_size):
                counts[(scheme.class_of(rr_respond(scheme, state, i_phi)) - k) % K] += 1
            assert counts == list(scheme.A)


class TestEstimatorIdentity:
    """Test the estimator against the channel it inverts."""

    @pytest.mark.parametrize("K", [2, 4, 8])
    def test_inverse_of_channel(self, K):
        """Test channel times estimator is the identity in exact arithmetic."""
        A = largest_remainder(_lying_probs(K), 256)
        M = channel_matrix(A, 256)
        E = estimator_matrix(A, 256)
        product = [[sum((M[i][j] * E[j][c] for j in range(K)), Fraction(0)) for c in range(K)] for i in range(K)]
        assert product == [[Fraction(int(i == c)) for c in range(K)] for i in range(K)]

    @pytest.mark.slow
    def test_monte_carlo_within_three_sigma(self):
        """Test ten thousand simulated clients land within three standard deviations."""
        scheme = build_scheme(4, _lying_probs(4), 8)
        lie = np.array([scheme.class_of(v) for v in scheme.evaluations])
        true_counts = [4000, 3000, 2000, 1000]
        truth = np.repeat(np.arange(4), true_counts)
        gen = np.random.default_rng(20240611)
        coins = gen.integers(0, scheme.omega_size, size=(2, truth.size))
        reported = (truth + lie[(coins[0] + coins[1]) % scheme.omega_size]) % 4
        observed = np.bincount(reported, minlength=4).tolist()
        estimate = histogram_estimate(observed, scheme.A, scheme.omega_size)
        variance = estimate_variance(true_counts, scheme.A, scheme.omega_size)
        for est, true, var in zip(estimate, true_counts, variance):
            assert abs(float(est) - true) <= 3 * math.sqrt(float(var))
