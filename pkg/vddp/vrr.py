"""Verifiable randomized response over cyclic subgroups of the scalar field.

A client's class k is encoded as chi^k in the order-K subgroup. Its response is
y = x * F(omega^{i_sigma + i_phi}), where F takes the value chi^k on exactly A_k points
of the domain Omega, so the public coin i_phi and the private coin i_sigma each
randomize the output with probabilities A_k / |Omega|.
"""

import logging
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import mpmath

from vddp.accountant import rr_epsilon
from vddp.algebra import BLS_FIELD, EvalDomain, PrimeField, domain_generate, ntt, poly_add, poly_eval, poly_scale, vanishing_poly
from vddp.commit import Commitment, PublicParams, kzg_commit
from vddp.errors import ParameterError
from vddp.rng import Rng
from vddp.sigma import (
    NO_TAMPER,
    EvalStatement,
    ProdStatement,
    _run,
    product_relation,
    prove_evsc,
    prove_prod,
    simulate_evsc,
    simulate_relation,
    verify_evsc,
    verify_prod,
)
from vddp.transcript import ChallengeSource, Transcript, TranscriptReader

logger = logging.getLogger(__name__)


@dataclass
class RrScheme:
    """Quantized randomized response: F(Omega) holds A_k copies of chi^k."""

    K: int
    chi: int
    domain: EvalDomain
    A: Tuple[int, ...]
    F_coeffs: List[int]
    evaluations: List[int]
    realized_eps: "mpmath.mpf"
    field: PrimeField = BLS_FIELD
    _class_of: Dict[int, int] = dc_field(default_factory=dict, repr=False)
    _commitments: Dict[str, Commitment] = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._class_of:
            self._class_of = {pow(self.chi, k, self.field.modulus): k for k in range(self.K)}

    @property
    def omega_size(self) -> int:
        return self.domain.size

    @property
    def probabilities(self) -> List[Fraction]:
        return [Fraction(a, self.omega_size) for a in self.A]

    def encode(self, k: int) -> int:
        """Class index -> subgroup element chi^k."""
        return pow(self.chi, k % self.K, self.field.modulus)

    def class_of(self, value: int) -> int:
        """Subgroup element -> class index."""
        value %= self.field.modulus
        if value not in self._class_of:
            raise ParameterError("value is not in the response subgroup")
        return self._class_of[value]

    def in_subgroup(self, value: int) -> bool:
        return pow(value, self.K, self.field.modulus) == 1

    def commitment(self, pp: PublicParams) -> Commitment:
        """g^{F(τ)}, cached per public parameters."""
        key = pp.fingerprint()
        if key not in self._commitments:
            self._commitments[key] = kzg_commit(self.F_coeffs, [], pp)
        return self._commitments[key]


def largest_remainder(probs: Sequence[Fraction], total: int) -> List[int]:
    """Integer counts summing to `total`, rounding p_k * total by largest remainder."""
    raw = [Fraction(p) * total for p in probs]
    counts = [int(r) for r in raw]
    leftover = total - sum(counts)
    order = sorted(range(len(raw)), key=lambda k: (-(raw[k] - counts[k]), k))
    for k in order[:leftover]:
        counts[k] += 1
    return counts


def nearest_admissible_k(K: int, field_: PrimeField = BLS_FIELD) -> int:
    order = field_.modulus - 1
    for delta in range(0, K + 1):
        for candidate in (K - delta, K + delta):
            if candidate >= 2 and order % candidate == 0:
                return candidate
    return 2


def build_scheme_on_domain(K: int, target_probs: Sequence, domain: EvalDomain) -> RrScheme:
    """Scheme over an arbitrary subgroup domain (toy fields included)."""
    f = domain.field
    if K < 2:
        raise ParameterError("K must be at least 2")
    if (f.modulus - 1) % K != 0:
        raise ParameterError(
            f"K={K} does not divide p-1; nearest admissible K is {nearest_admissible_k(K, f)}"
        )
    if len(target_probs) != K:
        raise ParameterError(f"expected {K} probabilities, got {len(target_probs)}")
    probs = [Fraction(p) for p in target_probs]
    if any(p < 0 for p in probs) or sum(probs) != 1:
        raise ParameterError("probabilities must be non-negative and sum to 1")
    A = largest_remainder(probs, domain.size)
    if any(a == 0 for a in A):
        raise ParameterError("probability underflow; increase m")
    chi = f.root_of_unity(K)
    evaluations: List[int] = []
    for k, a in enumerate(A):
        evaluations.extend([pow(chi, k, f.modulus)] * a)
    F = ntt(evaluations, domain)
    scheme = RrScheme(
        K=K,
        chi=chi,
        domain=domain,
        A=tuple(A),
        F_coeffs=F,
        evaluations=evaluations,
        realized_eps=rr_epsilon(A, domain.size),
        field=f,
    )
    logger.debug("Built RR scheme K=%d |Omega|=%d A=%s", K, domain.size, A)
    return scheme


def build_scheme(K: int, target_probs: Sequence, m: int, field_: PrimeField = BLS_FIELD) -> RrScheme:
    """Scheme over the 2^m domain of the scalar field."""
    if (field_.modulus - 1) % K != 0:
        raise ParameterError(
            f"K={K} does not divide p-1; nearest admissible K is {nearest_admissible_k(K, field_)}"
        )
    return build_scheme_on_domain(K, target_probs, domain_generate(m, field_))


@dataclass
class VrrClientState:
    """Client secrets; sigma_point is omega^{i_sigma} for an honest client."""

    x: int
    i_sigma: int
    r_x: int
    r_sigma: int
    com: Commitment
    psi: Commitment
    sigma_point: int

    @property
    def committed(self) -> Tuple[Commitment, Commitment]:
        return self.com, self.psi


def new_client(scheme: RrScheme, k: int, pp: PublicParams, rng: Rng, i_sigma: Optional[int] = None) -> VrrClientState:
    """Commit to class k and a private coin i_sigma."""
    x = scheme.encode(k)
    i_sigma = rng.index(scheme.omega_size) if i_sigma is None else i_sigma
    sigma_point = scheme.domain.element(i_sigma)
    r_x, r_sigma = rng.scalar(), rng.scalar()
    bk = pp.backend
    return VrrClientState(
        x=x,
        i_sigma=i_sigma,
        r_x=r_x,
        r_sigma=r_sigma,
        com=bk.msm([pp.g, pp.h], [x, r_x]),
        psi=bk.msm([pp.g, pp.h], [sigma_point, r_sigma]),
        sigma_point=sigma_point,
    )


def rr_respond(scheme: RrScheme, state: VrrClientState, i_phi: int) -> int:
    """y = x * F(omega^{i_sigma + i_phi})."""
    if not scheme.in_subgroup(state.x):
        raise ParameterError("client value is not in the response subgroup")
    p = scheme.field.modulus
    point = state.sigma_point * scheme.domain.element(i_phi) % p
    if point == scheme.domain.element(state.i_sigma + i_phi):
        value = scheme.evaluations[(state.i_sigma + i_phi) % scheme.omega_size]
    else:
        value = poly_eval(scheme.F_coeffs, point, scheme.field)
    return state.x * value % p


def response_histogram(scheme: RrScheme, i_sigma: Optional[int] = None, i_phi: Optional[int] = None) -> List[int]:
    """Counts of F(omega^{i_sigma + i_phi}) classes with one coin fixed and the other enumerated."""
    if (i_sigma is None) == (i_phi is None):
        raise ParameterError("fix exactly one of i_sigma and i_phi")
    fixed = i_sigma if i_sigma is not None else i_phi
    n = scheme.omega_size
    counts = [0] * scheme.K
    for free in range(n):
        counts[scheme.class_of(scheme.evaluations[(fixed + free) % n])] += 1
    return counts


@dataclass
class VrrStatement:
    com: Commitment
    psi: Commitment
    i_phi: int
    y: Optional[int] = None


def _fused_statement(stmt: VrrStatement, scheme: RrScheme, pp: PublicParams, com_z: Commitment, alpha: int):
    bk = pp.backend
    n = scheme.omega_size
    com_t = bk.mul(stmt.psi, scheme.domain.element(stmt.i_phi))
    com_f_alpha = bk.add(scheme.commitment(pp), bk.mul(pp.zd_base(n), alpha))
    return EvalStatement(com_y=com_z, com_x=com_t, com_F=com_f_alpha)


def _f_alpha(scheme: RrScheme, alpha: int) -> List[int]:
    f = scheme.field
    return poly_add(scheme.F_coeffs, poly_scale(vanishing_poly(scheme.omega_size, f), alpha, f), f)


def prove_vrr(
    tr: Transcript,
    state: VrrClientState,
    scheme: RrScheme,
    stmt: VrrStatement,
    pp: PublicParams,
    rng: Rng,
    tamper: FrozenSet[str] = NO_TAMPER,
) -> int:
    f, bk = scheme.field, pp.backend
    p = f.modulus
    shift = scheme.domain.element(stmt.i_phi)
    t = state.sigma_point * shift % p
    r_t = state.r_sigma * shift % p
    z = poly_eval(scheme.F_coeffs, t, f)
    # Not rr_respond: a cheating client may hold x outside the subgroup
    y = state.x * z % p
    if "vrr.y" in tamper:
        y = y * scheme.chi % p
    tr.send_scalar("vrr.y", y)

    r_z = rng.scalar()
    com_z = bk.msm([pp.g, pp.h], [z, r_z])
    if "vrr.com_z" in tamper:
        com_z = bk.add(com_z, pp.g)
    tr.send_point("vrr.com_z", com_z)

    alpha = tr.challenge("vrr.alpha")
    eval_stmt = _fused_statement(stmt, scheme, pp, com_z, alpha)
    prove_evsc(tr, z, r_z, t, r_t, _f_alpha(scheme, alpha), eval_stmt, pp, rng, label="vrr.evsc", tamper=tamper)
    prod_stmt = ProdStatement(bk.mul(pp.g, y), com_z, stmt.com)
    prove_prod(tr, (y, 0, z, r_z, state.x, state.r_x), prod_stmt, pp, rng, label="vrr.prod", tamper=tamper)
    return y


def verify_vrr(reader: TranscriptReader, stmt: VrrStatement, scheme: RrScheme, pp: PublicParams) -> bool:
    bk = pp.backend
    y = reader.read_scalar("vrr.y")
    if not scheme.in_subgroup(y):
        logger.info("VRR reject: response outside the subgroup")
        return False
    if stmt.y is not None and y != stmt.y % scheme.field.modulus:
        logger.info("VRR reject: response differs from the published one")
        return False
    com_z = reader.read_point("vrr.com_z")
    alpha = reader.challenge("vrr.alpha")
    if not verify_evsc(reader, _fused_statement(stmt, scheme, pp, com_z, alpha), pp, label="vrr.evsc"):
        return False
    return verify_prod(reader, ProdStatement(bk.mul(pp.g, y), com_z, stmt.com), pp, label="vrr.prod")


def read_response(tr: Union[Transcript, TranscriptReader]) -> int:
    """The response y carried as the first transcript message."""
    return int.from_bytes(tr.messages[0].data, "little")


def vrr_protocol(
    state: VrrClientState,
    scheme: RrScheme,
    com: Commitment,
    psi: Commitment,
    i_phi: int,
    pp: PublicParams,
    rng: Optional[Rng] = None,
    source: Optional[ChallengeSource] = None,
    tamper: FrozenSet[str] = NO_TAMPER,
) -> Tuple[bool, int, Transcript]:
    """Run the client proof for one response; returns (accepted, y, transcript)."""
    stmt = VrrStatement(com, psi, i_phi)
    accepted, tr = _run(
        lambda t, prng: prove_vrr(t, state, scheme, stmt, pp, prng, tamper=tamper),
        lambda reader: verify_vrr(reader, stmt, scheme, pp),
        pp, rng, source, "vrr",
    )
    return accepted, read_response(tr), tr


def simulate_vrr_into(tr: Transcript, stmt: VrrStatement, scheme: RrScheme, pp: PublicParams, rng: Rng) -> None:
    """Accepting transcript from (com, psi, i_phi, y) alone."""
    if stmt.y is None:
        raise ParameterError("the simulator needs the published response y")
    bk = pp.backend
    tr.send_scalar("vrr.y", stmt.y)
    com_z = bk.msm([pp.g, pp.h], [rng.scalar(), rng.scalar()])
    tr.send_point("vrr.com_z", com_z)
    alpha = rng.scalar()
    tr.record_challenge("vrr.alpha", alpha)
    simulate_evsc(tr, _fused_statement(stmt, scheme, pp, com_z, alpha), _f_alpha(scheme, alpha), pp, rng, label="vrr.evsc")
    prod_stmt = ProdStatement(bk.mul(pp.g, stmt.y), com_z, stmt.com)
    simulate_relation(product_relation(prod_stmt, pp), tr, rng, "vrr.prod")


# Histogram estimation


def channel_matrix(A: Sequence[int], omega_size: int) -> List[List[Fraction]]:
    """M[k'][k] = Pr[reported class k' | true class k] = A[(k' - k) mod K] / |Omega|."""
    K = len(A)
    return [[Fraction(A[(kp - k) % K], omega_size) for k in range(K)] for kp in range(K)]


def _invert(matrix: List[List[Fraction]]) -> List[List[Fraction]]:
    n = len(matrix)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise ParameterError("singular channel matrix")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv_p = 1 / aug[col][col]
        aug[col] = [v * inv_p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def estimator_matrix(A: Sequence[int], omega_size: int) -> List[List[Fraction]]:
    return _invert(channel_matrix(A, omega_size))


def histogram_estimate(observed: Sequence[int], A: Sequence[int], omega_size: int) -> List[Fraction]:
    """Unbiased estimate of the true class counts from reported counts."""
    if len(observed) != len(A):
        raise ParameterError("observed histogram and multiplicities differ in length")
    inv = estimator_matrix(A, omega_size)
    return [sum((row[k] * observed[k] for k in range(len(A))), Fraction(0)) for row in inv]


def estimate_variance(true_counts: Sequence[int], A: Sequence[int], omega_size: int) -> List[Fraction]:
    """Per-class variance of the estimator when class k has true_counts[k] clients."""
    K = len(A)
    M = channel_matrix(A, omega_size)
    inv = _invert(M)
    cov = [[Fraction(0)] * K for _ in range(K)]
    for k, count in enumerate(true_counts):
        col = [M[kp][k] for kp in range(K)]
        for i in range(K):
            for j in range(K):
                cov[i][j] += count * ((col[i] if i == j else 0) - col[i] * col[j])
    out = []
    for a in range(K):
        row = inv[a]
        out.append(sum((row[i] * cov[i][j] * row[j] for i in range(K) for j in range(K)), Fraction(0)))
    return out


def observed_histogram(scheme: RrScheme, responses: Sequence[int]) -> List[int]:
    counts = [0] * scheme.K
    for y in responses:
        counts[scheme.class_of(y)] += 1
    return counts
