"""Unit tests for vddp.sharing"""

import pytest

from vddp.commit import commit_vector
from vddp.errors import ParameterError
from vddp.rng import Rng
from vddp.sharing import (
    ShareCommitment,
    aggr_share,
    aggr_share_com,
    commit_share,
    load_shares,
    rec_data_com,
    rec_sec,
    save_shares,
    secret_share,
    share_domain,
)


class TestSecretSharing:
    """Test additive shares."""

    def test_reconstruction(self, rng):
        """Test the shares sum to the secret."""
        v = [5, 0, 17, 2 ** 100]
        shares = secret_share(v, 3, rng, randomness=[1, 2, 3])
        assert shares.n == 3
        assert shares.dimension == 4
        assert rec_sec(shares.shares) == v
        assert rec_sec(shares.rand_shares) == [1, 2, 3]

    def test_single_share_is_the_secret(self, rng):
        """Test n = 1."""
        assert secret_share([7, 8], 1, rng).shares == [[7, 8]]

    def test_no_shares(self, rng):
        """Test n < 1 raises."""
        with pytest.raises(ParameterError, match="at least one share"):
            secret_share([1], 0, rng)

    def test_individual_shares_look_random(self):
        """Test the first n - 1 shares do not depend on the secret."""
        a = secret_share([1, 2], 3, Rng(9)).shares
        b = secret_share([100, 200], 3, Rng(9)).shares
        assert a[:2] == b[:2]
        assert a[2] != b[2]

    def test_aggregate_over_clients(self, rng):
        """Test per-server sums reconstruct the total."""
        clients = [[1, 2], [3, 4], [5, 6]]
        share_sets = [secret_share(v, 2, rng) for v in clients]
        per_server = [aggr_share([s.shares[i] for s in share_sets]) for i in range(2)]
        assert rec_sec(per_server) == [9, 12]

    def test_empty_aggregate(self):
        """Test an empty client set gives the zero vector of the given dimension."""
        assert aggr_share([], dimension=3) == [0, 0, 0]
        with pytest.raises(ParameterError, match="dimension is required"):
            aggr_share([])

    def test_dimension_mismatch(self):
        """Test ragged shares raise."""
        with pytest.raises(ParameterError, match="dimension mismatch"):
            aggr_share([[1, 2], [3]])


class TestShareCommitments:
    """Test the commitment homomorphisms."""

    def test_share_commitments_multiply_to_vector_commitment(self, pp, rng):
        """Test the product of share commitments commits to the whole vector."""
        v = [3, 1, 4]
        randomness = rng.scalars(4)
        shares = secret_share(v, 3, rng, randomness=randomness)
        domain = share_domain(len(v))
        coms = [commit_share(shares.shares[i], shares.rand_shares[i], pp, domain) for i in range(3)]
        assert rec_data_com(coms, pp).point == commit_vector(v, randomness, domain, pp)

    def test_aggregated_commitment(self, pp, rng):
        """Test a server's aggregated share matches its aggregated commitment."""
        domain = share_domain(2)
        vectors = [[1, 2], [3, 4]]
        rands = [rng.scalars(3), rng.scalars(3)]
        coms = [commit_share(v, r, pp, domain) for v, r in zip(vectors, rands)]
        combined = commit_share(aggr_share(vectors), aggr_share(rands), pp, domain)
        assert aggr_share_com(coms, pp).point == combined.point

    def test_mixed_parameters(self, pp, rng):
        """Test commitments under other parameters are refused."""
        com = commit_share([1], rng.scalars(2), pp)
        foreign = ShareCommitment(com.point, "0000000000000000")
        with pytest.raises(ParameterError, match="mixed public parameters"):
            rec_data_com([com, foreign], pp)

    def test_share_domain_size(self):
        """Test dimensions round up to a power of two."""
        assert share_domain(5).size == 8
        assert share_domain(0).size == 1


class TestShareFiles:
    """Test the binary share format."""

    def test_save_and_load(self, pp, rng, tmp_path):
        """Test a share file keeps values, randomness and fingerprint."""
        shares = secret_share([10, 20, 30], 2, rng, randomness=[7, 8])
        path = tmp_path / "server1.shares"
        save_shares(shares, 1, pp.fingerprint(), path)
        n, values, rand, fingerprint = load_shares(path)
        assert n == 2
        assert values == shares.shares[1]
        assert rand == shares.rand_shares[1]
        assert fingerprint == pp.fingerprint()

    def test_bad_magic(self, tmp_path):
        """Test foreign files are refused."""
        path = tmp_path / "junk"
        path.write_bytes(b"NOPE" + b"\x00" * 40)
        with pytest.raises(ParameterError, match="not a vddp share file"):
            load_shares(path)

    def test_truncated(self, pp, rng, tmp_path):
        """Test a cut-off body is refused."""
        path = tmp_path / "short.shares"
        save_shares(secret_share([1, 2], 2, rng), 0, pp.fingerprint(), path)
        path.write_bytes(path.read_bytes()[:-3])
        with pytest.raises(ParameterError, match="truncated share file"):
            load_shares(path)
