"""Unit tests for vddp.groups and vddp.rng"""

import pytest

from vddp.errors import ParameterError
from vddp.groups import G1_BYTES, Bls12381Backend, ExponentBackend, available_backends, get_backend
from vddp.rng import Rng


class TestBackendRegistry:
    """Test backend lookup."""

    def test_available(self):
        """Test both backends are registered."""
        assert available_backends() == ["bls12_381", "exponent"]

    def test_shared_instance(self):
        """Test lookups return one instance per name."""
        assert get_backend("exponent") is get_backend("exponent")

    def test_default_follows_environment(self):
        """Test the configured default (exponent under the test environment)."""
        assert isinstance(get_backend(), ExponentBackend)

    def test_unknown_backend(self):
        """Test unknown names raise."""
        with pytest.raises(ParameterError, match="unknown group backend"):
            get_backend("secp256k1")


class TestExponentBackend:
    """Test the discrete-log stand-in."""

    def test_msm_and_counters(self):
        """Test msm skips zero scalars and counts the rest."""
        b = ExponentBackend()
        result = b.msm([b.g1, b.mul(b.g1, 5)], [3, 0])
        assert b.eq(result, b.mul(b.g1, 3))
        assert b.snapshot()["g1_mul"] == 3
        b.reset_counters()
        assert b.snapshot() == {}

    def test_bilinearity(self):
        """Test e(aP, bQ) e(-abP, Q) = 1."""
        b = ExponentBackend()
        lhs = (b.mul(b.g1, 6), b.mul2(b.g2, 7))
        rhs = (b.neg(b.mul(b.g1, 42)), b.g2)
        assert b.pairing_check([lhs, rhs])
        assert not b.pairing_check([lhs, (b.neg(b.mul(b.g1, 41)), b.g2)])

    def test_encoding(self):
        """Test fixed-width encodings and reduction checks."""
        b = ExponentBackend()
        point = b.mul(b.g1, 2 ** 100)
        data = b.encode_g1(point)
        assert len(data) == G1_BYTES
        assert b.decode_g1(data) == point
        with pytest.raises(ParameterError, match="not reduced"):
            b.decode_g1(b.order.to_bytes(G1_BYTES, "big"))
        with pytest.raises(ParameterError, match="length"):
            b.decode_g1(b"\x00" * 3)

    def test_sum_and_is_zero(self):
        """Test sum of P and -P is the identity."""
        b = ExponentBackend()
        p = b.mul(b.g1, 9)
        assert b.is_zero(b.sum([p, b.neg(p)]))


@pytest.mark.bls
class TestBls12381Backend:
    """Test the real curve."""

    def test_encoding_round_trip(self):
        """Test compressed G1 points decode to the same point."""
        b = Bls12381Backend()
        point = b.mul(b.g1, 123456789)
        assert b.eq(b.decode_g1(b.encode_g1(point)), point)

    def test_bad_encoding(self):
        """Test invalid compressed bytes raise ParameterError."""
        b = Bls12381Backend()
        with pytest.raises(ParameterError):
            b.decode_g1(b"\x00" * G1_BYTES)

    def test_pairing_bilinearity(self):
        """Test e(aP, bQ) e(-abP, Q) = 1 with one final exponentiation."""
        b = Bls12381Backend()
        assert b.pairing_check([(b.mul(b.g1, 3), b.mul2(b.g2, 5)), (b.neg(b.mul(b.g1, 15)), b.g2)])
        assert b.snapshot()["pairing"] == 2


class TestRng:
    """Test seeded randomness."""

    def test_seeded_streams_repeat(self):
        """Test equal seeds give equal draws."""
        assert Rng(7).scalars(4) == Rng(7).scalars(4)

    def test_children_are_independent_of_parent_draws(self):
        """Test child seeds do not depend on how much the parent consumed."""
        a, b = Rng(7), Rng(7)
        b.scalars(10)
        assert a.child("server-0").scalar() == b.child("server-0").scalar()
        assert a.child("server-0").scalar() != a.child("server-1").scalar()

    def test_unseeded_is_not_deterministic(self):
        """Test OS entropy mode."""
        rng = Rng()
        assert not rng.deterministic
        assert not rng.child("x").deterministic

    def test_bits_and_ranges(self):
        """Test bit vectors and bounded draws."""
        rng = Rng(3)
        assert set(rng.bits(64)) <= {0, 1}
        assert len(rng.bits(0)) == 0
        assert all(0 <= rng.index(5) < 5 for _ in range(50))
        assert rng.nonzero_scalar() != 0
        with pytest.raises(ValueError, match="positive"):
            rng.randbelow(0)
