"""Additive secret sharing of vectors and the matching commitment homomorphisms."""

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

from vddp.algebra import BLS_FIELD, EvalDomain, PrimeField, domain_generate, next_power_of_two
from vddp.commit import Commitment, PublicParams, commit_vector
from vddp.errors import ParameterError
from vddp.groups import G1
from vddp.rng import Rng

logger = logging.getLogger(__name__)

SHARES_MAGIC = b"VDSS"


@dataclass
class ShareSet:
    """shares[i] and rand_shares[i] belong to server i."""

    shares: List[List[int]]
    rand_shares: List[List[int]]

    @property
    def n(self) -> int:
        return len(self.shares)

    @property
    def dimension(self) -> int:
        return len(self.shares[0]) if self.shares else 0


@dataclass
class ShareCommitment:
    point: G1
    pp_fingerprint: str


def _split(values: Sequence[int], n: int, rng: Rng, field_: PrimeField) -> List[List[int]]:
    p = field_.modulus
    parts = [[rng.randbelow(p) for _ in values] for _ in range(n - 1)]
    last = [(v - sum(col)) % p for v, col in zip(values, zip(*parts))] if parts else [v % p for v in values]
    return parts + [last]


def secret_share(
    v: Sequence[int],
    n: int,
    rng: Rng,
    randomness: Sequence[int] = (),
    field_: PrimeField = BLS_FIELD,
) -> ShareSet:
    """Split v (and its commitment randomness) into n additive shares; the last share closes the sum."""
    if n < 1:
        raise ParameterError("need at least one share")
    return ShareSet(shares=_split(v, n, rng, field_), rand_shares=_split(randomness, n, rng, field_))


def rec_sec(shares: Sequence[Sequence[int]], field_: PrimeField = BLS_FIELD) -> List[int]:
    """Coordinatewise sum of all shares."""
    return _sum_vectors(shares, None, field_)


def aggr_share(shares: Sequence[Sequence[int]], dimension: Optional[int] = None, field_: PrimeField = BLS_FIELD) -> List[int]:
    """Sum one server's shares over a set of clients; the empty set gives the zero vector."""
    return _sum_vectors(shares, dimension, field_)


def _sum_vectors(vectors: Sequence[Sequence[int]], dimension: Optional[int], field_: PrimeField) -> List[int]:
    if not vectors:
        if dimension is None:
            raise ParameterError("dimension is required for an empty share list")
        return [0] * dimension
    size = len(vectors[0]) if dimension is None else dimension
    if any(len(vec) != size for vec in vectors):
        raise ParameterError("dimension mismatch between shares")
    p = field_.modulus
    return [sum(col) % p for col in zip(*vectors)] if size else []


def share_domain(dimension: int, field_: PrimeField = BLS_FIELD) -> EvalDomain:
    """Evaluation domain holding a d-dimensional vector."""
    size = next_power_of_two(max(dimension, 1))
    return domain_generate(size.bit_length() - 1, field_)


def commit_share(share: Sequence[int], rand_share: Sequence[int], pp: PublicParams,
                 domain: Optional[EvalDomain] = None) -> ShareCommitment:
    """Vector commitment to one share; randomness is [blind, mask_0, ..., mask_e]."""
    domain = domain or share_domain(len(share), pp.field)
    return ShareCommitment(commit_vector(share, rand_share, domain, pp), pp.fingerprint())


def _product(coms: Sequence[ShareCommitment], pp: PublicParams) -> ShareCommitment:
    fingerprints = {c.pp_fingerprint for c in coms}
    if len(fingerprints) > 1 or (fingerprints and pp.fingerprint() not in fingerprints):
        raise ParameterError("mixed public parameters")
    return ShareCommitment(pp.backend.sum(c.point for c in coms), pp.fingerprint())


def rec_data_com(coms: Sequence[ShareCommitment], pp: PublicParams) -> ShareCommitment:
    """Commitment to a client's full vector from its per-server share commitments."""
    return _product(coms, pp)


def aggr_share_com(coms: Sequence[ShareCommitment], pp: PublicParams) -> ShareCommitment:
    """Commitment to a server's aggregated share from its per-client share commitments."""
    return _product(coms, pp)


def save_shares(shares: ShareSet, server: int, pp_fingerprint: str, path: Union[str, Path],
                field_: PrimeField = BLS_FIELD) -> None:
    """Binary share file: magic, (n, d, r), fingerprint, then the scalar arrays."""
    values = shares.shares[server]
    rand = shares.rand_shares[server]
    width = max(32, field_.byte_length)
    with open(path, "wb") as f:
        f.write(SHARES_MAGIC)
        f.write(struct.pack(">III", shares.n, len(values), len(rand)))
        f.write(bytes.fromhex(pp_fingerprint))
        for v in list(values) + list(rand):
            f.write(v.to_bytes(width, "little"))


def load_shares(path: Union[str, Path], field_: PrimeField = BLS_FIELD):
    """Returns (n, values, randomness, pp_fingerprint)."""
    data = Path(path).read_bytes()
    if data[:4] != SHARES_MAGIC:
        raise ParameterError("not a vddp share file")
    n, d, r = struct.unpack(">III", data[4:16])
    fingerprint = data[16:24].hex()
    width = max(32, field_.byte_length)
    body = data[24:]
    if len(body) != (d + r) * width:
        raise ParameterError("truncated share file")
    scalars = [int.from_bytes(body[i * width: (i + 1) * width], "little") for i in range(d + r)]
    return n, scalars[:d], scalars[d:], fingerprint
