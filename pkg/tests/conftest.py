"""Pytest configuration and shared fixtures."""

import pytest

from vddp.algebra import PrimeField
from vddp.commit import setup
from vddp.groups import get_backend
from vddp.randomness import derive_bernoulli
from vddp.rng import Rng

TEST_SEED = b"vddp-tests"


@pytest.fixture(autouse=True)
def fast_env(monkeypatch, tmp_path):
    """Run against the exponent backend with interactive challenges and no config file."""
    monkeypatch.setenv("VDDP_GROUP_BACKEND", "exponent")
    monkeypatch.setenv("VDDP_CHALLENGE_MODE", "interactive")
    monkeypatch.setattr("vddp.config.CONFIG_FILE", tmp_path / "missing_config.json")


@pytest.fixture(scope="session")
def backend():
    """Exponent-representation group backend."""
    return get_backend("exponent")


@pytest.fixture(scope="session")
def pp(backend):
    """Public parameters with the trapdoor kept for oracle checks."""
    return setup(256, seed=TEST_SEED, backend=backend, retain_trapdoor=True)


@pytest.fixture(scope="session")
def bls_pp():
    """Small real-curve parameters."""
    return setup(8, seed=TEST_SEED, backend="bls12_381")


@pytest.fixture
def rng():
    """Seeded randomness."""
    return Rng(1234)


@pytest.fixture
def toy_field():
    """F_97: p - 1 = 96 = 2^5 * 3."""
    return PrimeField(97)


@pytest.fixture(scope="session")
def small_params():
    """Laplace circuit small enough for end-to-end proofs (t=1, gamma=2, nu=4)."""
    return derive_bernoulli(1, 2, 4)
