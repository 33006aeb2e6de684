"""Sigma protocols over Pedersen and KZG commitments.

Every linear statement (opening, product, equality) is an instance of
``LinearRelation``: a set of equations ``target = sum(base * w[name])`` sharing
witness names and one challenge. The OR-proof and the polynomial evaluation protocol
are built on top. Each protocol has a prover writing to a ``Transcript``, a verifier
reading a ``TranscriptReader``, and a simulator that needs no witness.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from vddp.algebra import poly_div_linear, poly_eval, poly_sub
from vddp.commit import Commitment, KzgOpening, PublicParams, kzg_commit, kzg_open, kzg_verify
from vddp.errors import MalformedMessageError, ParameterError
from vddp.groups import G1
from vddp.rng import Rng
from vddp.transcript import REPLAY, ChallengeSource, Transcript, TranscriptReader, default_source

logger = logging.getLogger(__name__)

NO_TAMPER: FrozenSet[str] = frozenset()

# Attempts at drawing an evaluation point different from the committed input
EVSC_MAX_RETRIES = 4


@dataclass
class Equation:
    target: G1
    terms: List[Tuple[G1, str]]


@dataclass
class LinearRelation:
    """Conjunction of linear equations over shared witness scalars."""

    equations: List[Equation]
    pp: PublicParams
    names: List[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.names:
            seen: Dict[str, None] = {}
            for eq in self.equations:
                for _, name in eq.terms:
                    seen.setdefault(name)
            self.names = list(seen)

    def _combine(self, terms: List[Tuple[G1, str]], values: Dict[str, int]) -> G1:
        return self.pp.backend.msm([base for base, _ in terms], [values[name] for _, name in terms])

    def commit(self, rng: Rng) -> Tuple[Dict[str, int], List[G1]]:
        nonces = {name: rng.scalar() for name in self.names}
        return nonces, [self._combine(eq.terms, nonces) for eq in self.equations]

    def respond(self, nonces: Dict[str, int], witness: Dict[str, int], c: int) -> Dict[str, int]:
        p = self.pp.field.modulus
        return {name: (nonces[name] + c * witness[name]) % p for name in self.names}

    def check(self, announcements: Sequence[G1], c: int, responses: Dict[str, int]) -> bool:
        b = self.pp.backend
        for eq, a in zip(self.equations, announcements):
            lhs = self._combine(eq.terms, responses)
            rhs = b.add(a, b.mul(eq.target, c))
            if not b.eq(lhs, rhs):
                return False
        return True

    def simulate(self, c: int, rng: Rng) -> Tuple[List[G1], Dict[str, int]]:
        b = self.pp.backend
        responses = {name: rng.scalar() for name in self.names}
        announcements = [b.sub(self._combine(eq.terms, responses), b.mul(eq.target, c)) for eq in self.equations]
        return announcements, responses

    def extract(self, first: Tuple[int, Dict[str, int]], second: Tuple[int, Dict[str, int]]) -> Dict[str, int]:
        """Witness from two accepting transcripts sharing announcements."""
        f = self.pp.field
        (c1, s1), (c2, s2) = first, second
        if (c1 - c2) % f.modulus == 0:
            raise ParameterError("extraction needs two distinct challenges")
        denom = f.inv(c1 - c2)
        return {name: (s1[name] - s2[name]) * denom % f.modulus for name in self.names}

    def holds(self, witness: Dict[str, int]) -> bool:
        b = self.pp.backend
        return all(b.eq(self._combine(eq.terms, witness), eq.target) for eq in self.equations)


def prove_relation(
    relation: LinearRelation,
    witness: Dict[str, int],
    tr: Transcript,
    rng: Rng,
    label: str,
    tamper: bool = False,
) -> None:
    nonces, announcements = relation.commit(rng)
    for i, a in enumerate(announcements):
        tr.send_point(f"{label}.a{i}", a)
    c = tr.challenge(f"{label}.c")
    responses = relation.respond(nonces, witness, c)
    if tamper:
        first = relation.names[0]
        responses[first] = (responses[first] + 1) % relation.pp.field.modulus
    for name in relation.names:
        tr.send_scalar(f"{label}.s.{name}", responses[name])


def verify_relation(relation: LinearRelation, reader: TranscriptReader, label: str) -> bool:
    announcements = [reader.read_point(f"{label}.a{i}") for i in range(len(relation.equations))]
    c = reader.challenge(f"{label}.c")
    responses = {name: reader.read_scalar(f"{label}.s.{name}") for name in relation.names}
    ok = relation.check(announcements, c, responses)
    if not ok:
        logger.info("Sigma check %s failed", label)
    return ok


def simulate_relation(relation: LinearRelation, tr: Transcript, rng: Rng, label: str) -> None:
    c = rng.scalar()
    announcements, responses = relation.simulate(c, rng)
    for i, a in enumerate(announcements):
        tr.send_point(f"{label}.a{i}", a)
    tr.record_challenge(f"{label}.c", c)
    for name in relation.names:
        tr.send_scalar(f"{label}.s.{name}", responses[name])


def _safe(verify, *args) -> bool:
    try:
        return verify(*args)
    except MalformedMessageError as e:
        logger.info("Rejecting malformed transcript: %s", e)
        return False


def _prover_and_verifier_rngs(rng: Optional[Rng]) -> Tuple[Rng, Rng]:
    rng = rng or Rng()
    return rng.child("prover"), rng.child("verifier")


def _run(prove, verify, pp: PublicParams, rng: Optional[Rng], source: Optional[ChallengeSource], domain: str):
    prover_rng, verifier_rng = _prover_and_verifier_rngs(rng)
    tr = Transcript(pp.backend, source or default_source(rng=verifier_rng), domain=domain, field_=pp.field)
    prove(tr, prover_rng)
    accepted = _safe(verify, tr.reader())
    return accepted, tr


# Opening


@dataclass
class OpeningStatement:
    com: Commitment
    base: Optional[G1] = None


def opening_relation(stmt: OpeningStatement, pp: PublicParams) -> LinearRelation:
    base = stmt.base if stmt.base is not None else pp.g
    return LinearRelation([Equation(stmt.com, [(base, "x"), (pp.h, "r")])], pp)


def prove_opening(tr, x, r, stmt, pp, rng, label="open", tamper: FrozenSet[str] = NO_TAMPER) -> None:
    prove_relation(opening_relation(stmt, pp), {"x": x, "r": r}, tr, rng, label, "opening.response" in tamper)


def verify_opening(reader, stmt, pp, label="open") -> bool:
    return verify_relation(opening_relation(stmt, pp), reader, label)


def opening_protocol(
    x: int,
    r: int,
    com: Commitment,
    pp: PublicParams,
    rng: Optional[Rng] = None,
    source: Optional[ChallengeSource] = None,
    tamper: FrozenSet[str] = NO_TAMPER,
) -> Tuple[bool, Transcript]:
    """Schnorr-style proof of knowledge of (x, r) with com = g^x h^r."""
    stmt = OpeningStatement(com)
    return _run(
        lambda tr, prng: prove_opening(tr, x, r, stmt, pp, prng, tamper=tamper),
        lambda reader: verify_opening(reader, stmt, pp),
        pp, rng, source, "opening",
    )


# Product


@dataclass
class ProdStatement:
    com_y: Commitment
    com_z: Commitment
    com_x: Commitment


def product_relation(stmt: ProdStatement, pp: PublicParams) -> LinearRelation:
    """com_x = g^x h^{r_x}, com_z = g^z h^{r_z}, com_y = com_z^x h^{r'}."""
    g, h = pp.g, pp.h
    return LinearRelation(
        [
            Equation(stmt.com_x, [(g, "x"), (h, "r_x")]),
            Equation(stmt.com_z, [(g, "z"), (h, "r_z")]),
            Equation(stmt.com_y, [(stmt.com_z, "x"), (h, "r_prime")]),
        ],
        pp,
    )


def product_witness(y, r_y, z, r_z, x, r_x, pp: PublicParams) -> Dict[str, int]:
    p = pp.field.modulus
    return {"x": x % p, "r_x": r_x % p, "z": z % p, "r_z": r_z % p, "r_prime": (r_y - x * r_z) % p}


def prove_prod(tr, witness: Tuple[int, int, int, int, int, int], stmt, pp, rng, label="prod",
               tamper: FrozenSet[str] = NO_TAMPER) -> None:
    prove_relation(product_relation(stmt, pp), product_witness(*witness, pp), tr, rng, label,
                   "prod.response" in tamper)


def verify_prod(reader, stmt, pp, label="prod") -> bool:
    return verify_relation(product_relation(stmt, pp), reader, label)


def prod_protocol(
    y: int, r_y: int, z: int, r_z: int, x: int, r_x: int,
    com_y: Commitment, com_z: Commitment, com_x: Commitment,
    pp: PublicParams,
    rng: Optional[Rng] = None,
    source: Optional[ChallengeSource] = None,
    tamper: FrozenSet[str] = NO_TAMPER,
) -> Tuple[bool, Transcript]:
    """Prove y = z * x for three Pedersen commitments (r_y = 0 when com_y = g^y)."""
    stmt = ProdStatement(com_y, com_z, com_x)
    return _run(
        lambda tr, prng: prove_prod(tr, (y, r_y, z, r_z, x, r_x), stmt, pp, prng, tamper=tamper),
        lambda reader: verify_prod(reader, stmt, pp),
        pp, rng, source, "prod",
    )


# Equality between a Pedersen commitment and the constant term of a KZG commitment


@dataclass
class EqStatement:
    com_ped: Commitment
    com_kzg: Commitment
    extra_bases: List[G1] = field(default_factory=list)
    mask_len: int = 0


def equality_relation(stmt: EqStatement, pp: PublicParams) -> LinearRelation:
    g, h = pp.g, pp.h
    kzg_terms = [(g, "v")]
    kzg_terms += [(base, f"e{i}") for i, base in enumerate(stmt.extra_bases)]
    kzg_terms += [(pp.h_powers[j], f"m{j}") for j in range(stmt.mask_len)]
    return LinearRelation(
        [Equation(stmt.com_ped, [(g, "v"), (h, "r_ped")]), Equation(stmt.com_kzg, kzg_terms)],
        pp,
    )


def equality_witness(v: int, r_ped: int, R_kzg: Sequence[int], extra: Sequence[int] = ()) -> Dict[str, int]:
    witness = {"v": v, "r_ped": r_ped}
    witness.update({f"e{i}": e for i, e in enumerate(extra)})
    witness.update({f"m{j}": m for j, m in enumerate(R_kzg)})
    return witness


def prove_eq(tr, v, r_ped, R_kzg, stmt, pp, rng, extra=(), label="eq", tamper: FrozenSet[str] = NO_TAMPER) -> None:
    prove_relation(equality_relation(stmt, pp), equality_witness(v, r_ped, R_kzg, extra), tr, rng, label,
                   "eq.response" in tamper)


def verify_eq(reader, stmt, pp, label="eq") -> bool:
    return verify_relation(equality_relation(stmt, pp), reader, label)


def eq_protocol(
    v: int,
    r_ped: int,
    R_kzg: Sequence[int],
    com_ped: Commitment,
    com_kzg: Commitment,
    pp: PublicParams,
    rng: Optional[Rng] = None,
    source: Optional[ChallengeSource] = None,
    tamper: FrozenSet[str] = NO_TAMPER,
    v_kzg: Optional[int] = None,
) -> Tuple[bool, Transcript]:
    """Prove com_ped = g^v h^r_ped and com_kzg = g^v h^{R(τ)} hold for the same v.

    ``v_kzg`` lets tests make a cheating prover that uses a different constant in the
    KZG witness.
    """
    stmt = EqStatement(com_ped, com_kzg, mask_len=len(R_kzg))

    def _prove(tr, prng):
        relation = equality_relation(stmt, pp)
        witness = equality_witness(v, r_ped, R_kzg)
        if v_kzg is not None and v_kzg != v:
            # A cheater has no single v; it answers the second equation with its own value
            nonces, announcements = relation.commit(prng)
            for i, a in enumerate(announcements):
                tr.send_point(f"eq.a{i}", a)
            c = tr.challenge("eq.c")
            responses = relation.respond(nonces, witness, c)
            responses["v"] = (nonces["v"] + c * v_kzg) % pp.field.modulus
            for name in relation.names:
                tr.send_scalar(f"eq.s.{name}", responses[name])
            return
        prove_eq(tr, v, r_ped, R_kzg, stmt, pp, prng, tamper=tamper)

    return _run(_prove, lambda reader: verify_eq(reader, stmt, pp), pp, rng, source, "eq")


# OR-proof of bit validity


@dataclass
class OrStatement:
    com: Commitment
    base: Optional[G1] = None


def _or_targets(stmt: OrStatement, pp: PublicParams) -> Tuple[G1, G1]:
    base = stmt.base if stmt.base is not None else pp.g
    return stmt.com, pp.backend.sub(stmt.com, base)


def prove_or(tr, b: int, r: int, stmt: OrStatement, pp, rng, label="or", tamper: FrozenSet[str] = NO_TAMPER) -> None:
    """CDS disjunction: com opens to 0 over h, or com / base does."""
    bk, p, h = pp.backend, pp.field.modulus, pp.h
    targets = _or_targets(stmt, pp)
    real = 1 if b == 1 else 0
    fake = 1 - real
    c_fake, s_fake = rng.scalar(), rng.scalar()
    k = rng.scalar()
    a = [None, None]
    a[real] = bk.mul(h, k)
    a[fake] = bk.sub(bk.mul(h, s_fake), bk.mul(targets[fake], c_fake))
    tr.send_point(f"{label}.a0", a[0])
    tr.send_point(f"{label}.a1", a[1])
    c = tr.challenge(f"{label}.c")
    c_real = (c - c_fake) % p
    s_real = (k + c_real * r) % p
    if "or.response" in tamper:
        s_real = (s_real + 1) % p
    cs = [0, 0]
    ss = [0, 0]
    cs[real], ss[real] = c_real, s_real
    cs[fake], ss[fake] = c_fake, s_fake
    tr.send_scalar(f"{label}.c0", cs[0])
    tr.send_scalar(f"{label}.s0", ss[0])
    tr.send_scalar(f"{label}.s1", ss[1])


def verify_or(reader, stmt: OrStatement, pp, label="or") -> bool:
    bk, p, h = pp.backend, pp.field.modulus, pp.h
    targets = _or_targets(stmt, pp)
    a0 = reader.read_point(f"{label}.a0")
    a1 = reader.read_point(f"{label}.a1")
    c = reader.challenge(f"{label}.c")
    c0 = reader.read_scalar(f"{label}.c0")
    s0 = reader.read_scalar(f"{label}.s0")
    s1 = reader.read_scalar(f"{label}.s1")
    c1 = (c - c0) % p
    ok = bk.eq(bk.mul(h, s0), bk.add(a0, bk.mul(targets[0], c0))) and bk.eq(
        bk.mul(h, s1), bk.add(a1, bk.mul(targets[1], c1))
    )
    if not ok:
        logger.info("OR-proof %s failed", label)
    return ok


def simulate_or(tr, stmt: OrStatement, pp, rng, label="or") -> None:
    bk, p, h = pp.backend, pp.field.modulus, pp.h
    targets = _or_targets(stmt, pp)
    c, c0, s0, s1 = rng.scalar(), rng.scalar(), rng.scalar(), rng.scalar()
    c1 = (c - c0) % p
    tr.send_point(f"{label}.a0", bk.sub(bk.mul(h, s0), bk.mul(targets[0], c0)))
    tr.send_point(f"{label}.a1", bk.sub(bk.mul(h, s1), bk.mul(targets[1], c1)))
    tr.record_challenge(f"{label}.c", c)
    tr.send_scalar(f"{label}.c0", c0)
    tr.send_scalar(f"{label}.s0", s0)
    tr.send_scalar(f"{label}.s1", s1)


def or_protocol(
    b: int,
    r: int,
    com: Commitment,
    pp: PublicParams,
    rng: Optional[Rng] = None,
    source: Optional[ChallengeSource] = None,
    base: Optional[G1] = None,
    tamper: FrozenSet[str] = NO_TAMPER,
) -> Tuple[bool, Transcript]:
    """Prove com = base^b h^r with b in {0, 1}."""
    stmt = OrStatement(com, base)
    return _run(
        lambda tr, prng: prove_or(tr, b, r, stmt, pp, prng, tamper=tamper),
        lambda reader: verify_or(reader, stmt, pp),
        pp, rng, source, "or",
    )


# Polynomial evaluation y = F(x) for a public F


@dataclass
class EvalStatement:
    com_y: Commitment
    com_x: Commitment
    com_F: Commitment


def _send_opening(tr: Transcript, label: str, opening: KzgOpening) -> None:
    tr.send_scalar(f"{label}.rho", opening.rho)
    tr.send_point(f"{label}.gamma", opening.gamma)


def _read_opening(reader: TranscriptReader, label: str) -> KzgOpening:
    rho = reader.read_scalar(f"{label}.rho")
    gamma = reader.read_point(f"{label}.gamma")
    return KzgOpening(rho=rho, gamma=gamma)


def _mask(rng: Rng, mask_degree: Optional[int]) -> List[int]:
    if mask_degree is None:
        from vddp.config import get_mask_degree

        mask_degree = get_mask_degree()
    return rng.scalars(mask_degree + 1)


def prove_evsc(
    tr: Transcript,
    y: int, r_y: int, x: int, r_x: int,
    F: Sequence[int],
    stmt: EvalStatement,
    pp: PublicParams,
    rng: Rng,
    label: str = "evsc",
    tamper: FrozenSet[str] = NO_TAMPER,
    mask_degree: Optional[int] = None,
) -> None:
    f, bk = pp.field, pp.backend
    p = f.modulus
    # F'(X) = (F(X) - y) / (X - x)
    quotient, _ = poly_div_linear(poly_sub(list(F), [y], f), x, f)
    if "evsc.quotient" in tamper:
        quotient = list(quotient) or [0]
        quotient[0] = (quotient[0] + 1) % p
    R_q = _mask(rng, mask_degree)
    tr.send_point(f"{label}.com_fq", kzg_commit(quotient, R_q, pp))

    u = None
    for _ in range(EVSC_MAX_RETRIES):
        u = tr.challenge(f"{label}.u")
        if (u - x) % p == 0:
            tr.send_flag(f"{label}.retry", 1)
            continue
        tr.send_flag(f"{label}.retry", 0)
        break

    z_q = poly_eval(quotient, u, f)
    if "evsc.zprime" in tamper:
        z_q = (z_q + 1) % p
    r_zq = rng.scalar()
    com_zq = bk.msm([pp.g, pp.h], [z_q, r_zq])
    tr.send_point(f"{label}.com_zq", com_zq)
    z = poly_eval(F, u, f)
    tr.send_scalar(f"{label}.z", z)

    # (y - z) = (x - u) * z'
    prod_stmt = ProdStatement(bk.sub(stmt.com_y, bk.mul(pp.g, z)), com_zq, bk.sub(stmt.com_x, bk.mul(pp.g, u)))
    prove_prod(tr, ((y - z) % p, r_y, z_q, r_zq, (x - u) % p, r_x), prod_stmt, pp, rng,
               label=f"{label}.prod", tamper=tamper)

    _, opening_f = kzg_open(F, [], u, pp)
    _send_opening(tr, f"{label}.open_f", opening_f)
    shifted = poly_sub(quotient, [z_q], f)
    shifted_mask = poly_sub(R_q, [r_zq], f)
    _, opening_q = kzg_open(shifted, shifted_mask, u, pp)
    _send_opening(tr, f"{label}.open_q", opening_q)


def verify_evsc(reader: TranscriptReader, stmt: EvalStatement, pp: PublicParams, label: str = "evsc") -> bool:
    bk = pp.backend
    com_q = reader.read_point(f"{label}.com_fq")
    u = None
    for attempt in range(EVSC_MAX_RETRIES):
        u = reader.challenge(f"{label}.u")
        if reader.read_flag(f"{label}.retry") == 0:
            break
    else:
        logger.info("EvSc %s exhausted evaluation-point retries", label)
        return False
    com_zq = reader.read_point(f"{label}.com_zq")
    z = reader.read_scalar(f"{label}.z")
    prod_stmt = ProdStatement(bk.sub(stmt.com_y, bk.mul(pp.g, z)), com_zq, bk.sub(stmt.com_x, bk.mul(pp.g, u)))
    if not verify_prod(reader, prod_stmt, pp, label=f"{label}.prod"):
        return False
    opening_f = _read_opening(reader, f"{label}.open_f")
    if not kzg_verify(stmt.com_F, u, z, opening_f, pp):
        logger.info("EvSc %s: opening of F at u failed", label)
        return False
    opening_q = _read_opening(reader, f"{label}.open_q")
    if not kzg_verify(bk.sub(com_q, com_zq), u, 0, opening_q, pp):
        logger.info("EvSc %s: quotient opening failed", label)
        return False
    return True


def simulate_evsc(tr: Transcript, stmt: EvalStatement, F: Sequence[int], pp: PublicParams, rng: Rng,
                  label: str = "evsc") -> None:
    """Accepting transcript without knowing (x, y): pick the quotient opening first."""
    f, bk = pp.field, pp.backend
    com_zq = bk.msm([pp.g, pp.h], [rng.scalar(), rng.scalar()])
    u = rng.scalar()
    a, rho = rng.scalar(), rng.scalar()
    gamma = bk.mul(pp.g, a)
    # Commitment that opens to 0 at u under (rho, gamma)
    zero_at_u = bk.add(bk.mul(bk.sub(pp.g_powers[1], bk.mul(pp.g, u)), a), bk.mul(pp.h, rho))
    tr.send_point(f"{label}.com_fq", bk.add(zero_at_u, com_zq))
    tr.record_challenge(f"{label}.u", u)
    tr.send_flag(f"{label}.retry", 0)
    tr.send_point(f"{label}.com_zq", com_zq)
    z = poly_eval(F, u, f)
    tr.send_scalar(f"{label}.z", z)
    prod_stmt = ProdStatement(bk.sub(stmt.com_y, bk.mul(pp.g, z)), com_zq, bk.sub(stmt.com_x, bk.mul(pp.g, u)))
    simulate_relation(product_relation(prod_stmt, pp), tr, rng, f"{label}.prod")
    _, opening_f = kzg_open(F, [], u, pp)
    _send_opening(tr, f"{label}.open_f", opening_f)
    _send_opening(tr, f"{label}.open_q", KzgOpening(rho=rho, gamma=gamma))


def evsc_protocol(
    y: int, r_y: int, x: int, r_x: int,
    F: Sequence[int],
    com_y: Commitment, com_x: Commitment, com_F: Commitment,
    pp: PublicParams,
    rng: Optional[Rng] = None,
    source: Optional[ChallengeSource] = None,
    tamper: FrozenSet[str] = NO_TAMPER,
) -> Tuple[bool, Transcript]:
    """Prove the value committed in com_y is F evaluated at the value committed in com_x."""
    stmt = EvalStatement(com_y, com_x, com_F)
    return _run(
        lambda tr, prng: prove_evsc(tr, y, r_y, x, r_x, F, stmt, pp, prng, tamper=tamper),
        lambda reader: verify_evsc(reader, stmt, pp),
        pp, rng, source, "evsc",
    )


# Simulators


def simulate(protocol_id: str, statement, pp: PublicParams, rng: Optional[Rng] = None, **public) -> Transcript:
    """
    Witness-free transcript for a protocol.

    Args:
        protocol_id: One of opening, prod, eq, or, evsc, vrr
        statement: The protocol's statement dataclass
        pp: Public parameters
        rng: Simulator randomness
        **public: Extra public inputs (``F`` for evsc; ``scheme`` for vrr)

    Returns:
        Transcript accepted by the protocol's verifier in replay mode
    """
    rng = rng or Rng()
    tr = Transcript(pp.backend, ChallengeSource(mode=REPLAY), domain=protocol_id, field_=pp.field)
    if protocol_id == "opening":
        simulate_relation(opening_relation(statement, pp), tr, rng, "open")
    elif protocol_id == "prod":
        simulate_relation(product_relation(statement, pp), tr, rng, "prod")
    elif protocol_id == "eq":
        simulate_relation(equality_relation(statement, pp), tr, rng, "eq")
    elif protocol_id == "or":
        simulate_or(tr, statement, pp, rng)
    elif protocol_id == "evsc":
        simulate_evsc(tr, statement, public["F"], pp, rng)
    elif protocol_id == "vrr":
        from vddp.vrr import simulate_vrr_into

        simulate_vrr_into(tr, statement, public["scheme"], pp, rng)
    else:
        raise ParameterError(f"unknown protocol: {protocol_id}")
    return tr


_VERIFIERS = {
    "opening": lambda reader, stmt, pp: verify_opening(reader, stmt, pp),
    "prod": lambda reader, stmt, pp: verify_prod(reader, stmt, pp),
    "eq": lambda reader, stmt, pp: verify_eq(reader, stmt, pp),
    "or": lambda reader, stmt, pp: verify_or(reader, stmt, pp),
    "evsc": lambda reader, stmt, pp: verify_evsc(reader, stmt, pp),
}


def verify_simulated(protocol_id: str, tr: Transcript, statement, pp: PublicParams, **public) -> bool:
    """Run the real verifier over a simulated transcript (challenges accepted as recorded)."""
    reader = tr.reader(mode=REPLAY)
    if protocol_id == "vrr":
        from vddp.vrr import verify_vrr

        return _safe(verify_vrr, reader, statement, public["scheme"], pp)
    if protocol_id not in _VERIFIERS:
        raise ParameterError(f"unknown protocol: {protocol_id}")
    return _safe(_VERIFIERS[protocol_id], reader, statement, pp)
