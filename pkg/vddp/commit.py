"""Pedersen and hiding KZG commitments over a powers-of-tau setup."""

import hashlib
import logging
import struct
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from vddp.algebra import BLS_FIELD, EvalDomain, PrimeField, ntt, poly_add, poly_div_linear, poly_scale, poly_trim, vanishing_poly
from vddp.errors import ParameterError
from vddp.groups import G1, G2, GroupBackend, get_backend
from vddp.rng import Rng

logger = logging.getLogger(__name__)

Commitment = G1

PARAMS_MAGIC = b"VDDP"
PARAMS_VERSION = 1

SeedLike = Union[bytes, str, int, None]


@dataclass(frozen=True)
class KzgOpening:
    rho: int
    gamma: G1


@dataclass
class PublicParams:
    """Powers g^{τ^j} and h^{τ^j} for j = 0..max_degree plus (g2, g2^τ)."""

    max_degree: int
    g_powers: List[G1]
    h_powers: List[G1]
    g2: G2
    g2_tau: G2
    backend: GroupBackend
    field: PrimeField = BLS_FIELD
    trapdoor: Optional[int] = dc_field(default=None, repr=False)
    _lagrange: Dict[Tuple[int, int], List[G1]] = dc_field(default_factory=dict, repr=False)
    _fingerprint: Optional[str] = dc_field(default=None, repr=False)

    @property
    def g(self) -> G1:
        return self.g_powers[0]

    @property
    def h(self) -> G1:
        return self.h_powers[0]

    def fingerprint(self) -> str:
        """Short digest identifying these parameters."""
        if self._fingerprint is None:
            b = self.backend
            digest = hashlib.sha256()
            digest.update(b.name.encode())
            digest.update(struct.pack(">I", self.max_degree))
            digest.update(b.encode_g1(self.g_powers[min(1, self.max_degree)]))
            digest.update(b.encode_g1(self.h))
            digest.update(b.encode_g2(self.g2_tau))
            self._fingerprint = digest.hexdigest()[:16]
        return self._fingerprint

    def zd_base(self, n: int) -> G1:
        """g^{τ^n - 1}: commitment to the vanishing polynomial X^n - 1."""
        if n > self.max_degree:
            raise ParameterError(f"degree overflow: vanishing polynomial of degree {n} exceeds {self.max_degree}")
        return self.backend.sub(self.g_powers[n], self.g)

    def lagrange_bases(self, domain: EvalDomain) -> List[G1]:
        """Points g^{L_k(τ)} for the Lagrange basis of `domain`."""
        if domain.size > self.max_degree + 1:
            raise ParameterError(f"degree overflow: domain of size {domain.size} exceeds setup")
        key = (domain.size, domain.omega)
        if key not in self._lagrange:
            p = self.field.modulus
            omega_inv = pow(domain.omega, -1, p)
            points = _group_dft(self.g_powers[: domain.size], omega_inv, self.backend, p)
            n_inv = pow(domain.size, -1, p)
            self._lagrange[key] = [self.backend.mul(pt, n_inv) for pt in points]
        return self._lagrange[key]


def _group_dft(points: Sequence[G1], omega: int, backend: GroupBackend, p: int) -> List[G1]:
    """out[k] = sum_j omega^{jk} * points[j]."""
    n = len(points)
    if n == 1:
        return list(points)
    if n % 2:
        out = []
        for k in range(n):
            out.append(backend.msm(points, [pow(omega, j * k, p) for j in range(n)]))
        return out
    omega_sq = omega * omega % p
    even = _group_dft(points[0::2], omega_sq, backend, p)
    odd = _group_dft(points[1::2], omega_sq, backend, p)
    half = n // 2
    out = [None] * n
    w = 1
    for k in range(half):
        t = backend.mul(odd[k], w)
        out[k] = backend.add(even[k], t)
        out[k + half] = backend.sub(even[k], t)
        w = w * omega % p
    return out


def _seed_bytes(seed: SeedLike) -> bytes:
    if seed is None:
        import secrets

        return secrets.token_bytes(32)
    if isinstance(seed, int):
        return seed.to_bytes((seed.bit_length() + 8) // 8, "big", signed=True)
    if isinstance(seed, str):
        return seed.encode()
    return bytes(seed)


def _derive_scalar(seed: bytes, label: bytes, field: PrimeField) -> int:
    counter = 0
    while True:
        digest = hashlib.sha512(label + b"|" + seed + counter.to_bytes(4, "big")).digest()
        value = int.from_bytes(digest, "big") % field.modulus
        if value > 1:
            return value
        counter += 1


def setup(
    max_degree: int,
    seed: SeedLike = None,
    backend: Union[str, GroupBackend, None] = None,
    retain_trapdoor: Optional[bool] = None,
) -> PublicParams:
    """
    Derive public parameters from a seed.

    Args:
        max_degree: Largest committable polynomial degree
        seed: Bytes/str/int seed; None draws one from the OS
        backend: Group backend or its name; defaults to the configured one
        retain_trapdoor: Keep τ for oracle checks (test mode)

    Returns:
        PublicParams, byte-identical for identical seeds
    """
    if max_degree < 0:
        raise ParameterError("max_degree must be non-negative")
    group = backend if isinstance(backend, GroupBackend) else get_backend(backend)
    if retain_trapdoor is None:
        from vddp.config import get_retain_trapdoor

        retain_trapdoor = get_retain_trapdoor()
    field_ = BLS_FIELD
    raw = _seed_bytes(seed)
    tau = _derive_scalar(raw, b"tau", field_)
    eta = _derive_scalar(raw, b"eta", field_)
    p = field_.modulus

    g_powers: List[G1] = []
    h_powers: List[G1] = []
    power = 1
    for _ in range(max_degree + 1):
        g_powers.append(group.mul(group.g1, power))
        h_powers.append(group.mul(group.g1, power * eta % p))
        power = power * tau % p
    g2_tau = group.mul2(group.g2, tau)
    logger.debug("Setup of degree %d on %s", max_degree, group.name)
    return PublicParams(
        max_degree=max_degree,
        g_powers=g_powers,
        h_powers=h_powers,
        g2=group.g2,
        g2_tau=g2_tau,
        backend=group,
        field=field_,
        trapdoor=tau if retain_trapdoor else None,
    )


def check_params(pp: PublicParams, rng: Optional[Rng] = None) -> bool:
    """Batched check e(g_j, g2^τ) = e(g_{j+1}, g2) for all j, for both g and h powers."""
    if pp.max_degree == 0:
        return True
    rng = rng or Rng()
    b = pp.backend
    weights = [rng.nonzero_scalar() for _ in range(pp.max_degree)]
    lower = b.add(b.msm(pp.g_powers[:-1], weights), b.msm(pp.h_powers[:-1], weights))
    upper = b.add(b.msm(pp.g_powers[1:], weights), b.msm(pp.h_powers[1:], weights))
    return b.pairing_check([(lower, pp.g2_tau), (b.neg(upper), pp.g2)])


def pedersen_commit(x: int, r: int, pp: PublicParams) -> Commitment:
    return pp.backend.msm([pp.g, pp.h], [x, r])


def kzg_commit(F: Sequence[int], R: Sequence[int], pp: PublicParams) -> Commitment:
    """g^{F(τ)} h^{R(τ)}; R may be empty for public polynomials."""
    F = poly_trim(F)
    R = poly_trim(R)
    if len(F) > pp.max_degree + 1 or len(R) > pp.max_degree + 1:
        raise ParameterError(f"degree overflow: polynomial exceeds max degree {pp.max_degree}")
    b = pp.backend
    return b.add(b.msm(pp.g_powers[: len(F)], F), b.msm(pp.h_powers[: len(R)], R))


def kzg_open(F: Sequence[int], R: Sequence[int], x: int, pp: PublicParams) -> Tuple[int, KzgOpening]:
    """Open F at x: returns (F(x), opening with ρ = R(x) and the quotient commitment)."""
    q_f, y = poly_div_linear(list(F), x, pp.field)
    q_r, rho = poly_div_linear(list(R), x, pp.field)
    gamma = kzg_commit(q_f, q_r, pp)
    return y, KzgOpening(rho=rho, gamma=gamma)


def kzg_verify(com: Commitment, x: int, y: int, opening: KzgOpening, pp: PublicParams) -> bool:
    """Accept iff e(γ, g2^τ g2^{-x}) = e(com g^{-y} h^{-ρ}, g2)."""
    b = pp.backend
    try:
        shifted = b.add2(pp.g2_tau, b.mul2(pp.g2, -x))
        residue = b.sub(com, b.msm([pp.g, pp.h], [y, opening.rho]))
        return b.pairing_check([(opening.gamma, shifted), (b.neg(residue), pp.g2)])
    except (TypeError, ValueError, AttributeError, AssertionError) as e:
        logger.info("KZG verification rejected malformed input: %s", e)
        return False


def vector_polys(
    values: Sequence[int], randomness: Sequence[int], domain: EvalDomain
) -> Tuple[List[int], List[int]]:
    """
    Polynomials behind a vector commitment in evaluation form.

    Args:
        values: Vector placed on the domain (zero-padded)
        randomness: [blind, mask_0, ..., mask_e]; the blind multiplies X^n - 1
        domain: Evaluation domain of the vector

    Returns:
        (P, R) with P(ω^k) = values[k] and R the mask polynomial
    """
    if len(values) > domain.size:
        raise ParameterError(f"vector of length {len(values)} exceeds domain size {domain.size}")
    if not randomness:
        raise ParameterError("randomness must contain at least the blinding scalar")
    fld = domain.field
    padded = list(values) + [0] * (domain.size - len(values))
    P = ntt([v % fld.modulus for v in padded], domain)
    P = poly_add(P, poly_scale(vanishing_poly(domain.size, fld), randomness[0], fld), fld)
    return P, list(randomness[1:])


def commit_vector(values: Sequence[int], randomness: Sequence[int], domain: EvalDomain, pp: PublicParams) -> Commitment:
    P, R = vector_polys(values, randomness, domain)
    return kzg_commit(P, R, pp)


def random_vector_randomness(rng: Rng, mask_degree: Optional[int] = None) -> List[int]:
    if mask_degree is None:
        from vddp.config import get_mask_degree

        mask_degree = get_mask_degree()
    return rng.scalars(2 + mask_degree)


def save_params(pp: PublicParams, path: Union[str, Path]) -> None:
    """Write params as: magic, version, backend name, degree, then compressed points.

    The trapdoor is never written.
    """
    b = pp.backend
    name = b.name.encode()
    with open(path, "wb") as f:
        f.write(PARAMS_MAGIC)
        f.write(struct.pack(">BB", PARAMS_VERSION, len(name)))
        f.write(name)
        f.write(struct.pack(">I", pp.max_degree))
        for pt in pp.g_powers:
            f.write(b.encode_g1(pt))
        for pt in pp.h_powers:
            f.write(b.encode_g1(pt))
        f.write(b.encode_g2(pp.g2))
        f.write(b.encode_g2(pp.g2_tau))


def load_params(path: Union[str, Path]) -> PublicParams:
    data = Path(path).read_bytes()
    if data[:4] != PARAMS_MAGIC:
        raise ParameterError("not a vddp params file")
    version, name_len = struct.unpack(">BB", data[4:6])
    if version != PARAMS_VERSION:
        raise ParameterError(f"unsupported params version {version}")
    offset = 6
    backend = get_backend(data[offset: offset + name_len].decode())
    offset += name_len
    (max_degree,) = struct.unpack(">I", data[offset: offset + 4])
    offset += 4
    from vddp.groups import G1_BYTES, G2_BYTES

    def _take(n: int) -> bytes:
        nonlocal offset
        chunk = data[offset: offset + n]
        if len(chunk) != n:
            raise ParameterError("truncated params file")
        offset += n
        return chunk

    g_powers = [backend.decode_g1(_take(G1_BYTES)) for _ in range(max_degree + 1)]
    h_powers = [backend.decode_g1(_take(G1_BYTES)) for _ in range(max_degree + 1)]
    g2 = backend.decode_g2(_take(G2_BYTES))
    g2_tau = backend.decode_g2(_take(G2_BYTES))
    return PublicParams(max_degree, g_powers, h_powers, g2, g2_tau, backend)
