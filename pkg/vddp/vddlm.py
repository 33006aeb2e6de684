"""Verifiable distributed discrete Laplace mechanism.

Each server commits to an obfuscation seed sigma before the verifier draws its
public coin phi. The server then expands sigma + phi with the Legendre PRF, feeds
the bits through the Laplace circuit for every dimension and publishes its
aggregated share plus noise, proving every step against the committed columns.
"""

import logging
from dataclasses import dataclass, field as dc_field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from vddp.algebra import BLS_FIELD, PrimeField
from vddp.commit import Commitment, PublicParams, commit_vector, vector_polys
from vddp.constraints import (
    LAP_COLUMNS,
    LPRF_COLUMNS,
    ColumnPoly,
    ConstraintSystem,
    assign_witness,
    column_poly,
    prove_circuit,
    verify_circuit,
)
from vddp.errors import ParameterError
from vddp.randomness import LaplaceParams, LapTrace, LprfOutput, c_lap_from_bits, lprf_eval
from vddp.rng import Rng
from vddp.sharing import ShareCommitment, ShareSet, aggr_share_com, commit_share, rec_data_com, secret_share, share_domain
from vddp.sigma import (
    NO_TAMPER,
    EqStatement,
    Equation,
    LinearRelation,
    OrStatement,
    _run,
    prove_eq,
    prove_or,
    prove_relation,
    verify_eq,
    verify_or,
    verify_relation,
)
from vddp.transcript import ChallengeSource, Transcript, TranscriptReader

logger = logging.getLogger(__name__)

SERVER_DEVIATIONS = (
    "bit-flip",
    "chain-break",
    "sign-forge",
    "magnitude-forge",
    "noise-omit",
    "output-forge",
    "zero-noise-forge",
    "share-mismatch",
)


@dataclass
class ServerState:
    """Obfuscation seed with its commitment psi = g^sigma h^rho."""

    sigma: int
    rho: int
    psi: Commitment
    x_share: List[int] = dc_field(default_factory=list)
    r_share: List[int] = dc_field(default_factory=list)


def commit_ob(pp: PublicParams, rng: Rng, sigma: Optional[int] = None) -> ServerState:
    """Pick (or reuse) sigma and commit to it."""
    sigma = rng.scalar() if sigma is None else sigma % pp.field.modulus
    rho = rng.scalar()
    return ServerState(sigma=sigma, rho=rho, psi=pp.backend.msm([pp.g, pp.h], [sigma, rho]))


def fuse_psi(psi: Commitment, phi: int, pp: PublicParams) -> Commitment:
    """psi' = psi * g^phi commits to sigma + phi under the same rho."""
    return pp.backend.add(psi, pp.backend.mul(pp.g, phi))


@dataclass
class ServerWitness:
    seed: int
    lprf: LprfOutput
    bits: List[int]
    traces: List[LapTrace]
    noise: List[int]
    x_share: List[int]
    y_share: List[int]


def server_compute(
    state: ServerState,
    phi: int,
    params: LaplaceParams,
    d: int,
    field_: PrimeField = BLS_FIELD,
    override_bits: Optional[Sequence[int]] = None,
    bit_budget: Optional[int] = None,
) -> Tuple[List[int], ServerWitness]:
    """
    Noisy share of the aggregate for one server.

    Args:
        state: Server seed and aggregated shares
        phi: Public coin drawn after the seed commitment
        params: Laplace circuit parameters
        d: Output dimension
        field_: Scalar field
        override_bits: Replace the LPRF bits (zero-noise traces in tests)
        bit_budget: LPRF bit budget; defaults to configuration

    Returns:
        (y_share, witness) with y_share[j] = x_share[j] + noise[j] as field residues
    """
    if bit_budget is None:
        from vddp.config import get_lprf_bit_budget

        bit_budget = get_lprf_bit_budget()
    demand = d * params.n_lap
    if demand > bit_budget:
        raise ParameterError(f"bit budget exceeded: {demand} LPRF bits requested, budget {bit_budget}")
    x_share = list(state.x_share) if state.x_share else [0] * d
    if len(x_share) != d:
        raise ParameterError("dimension mismatch between shares and output")
    p = field_.modulus
    seed = (state.sigma + phi) % p
    lprf = lprf_eval(seed, demand, field_)
    bits = list(lprf.bits) if override_bits is None else [int(b) for b in override_bits]
    if len(bits) != demand:
        raise ParameterError(f"expected {demand} bits, got {len(bits)}")
    traces, noise = [], []
    for j in range(d):
        value, trace = c_lap_from_bits(bits[j * params.n_lap: (j + 1) * params.n_lap], params)
        traces.append(trace)
        noise.append(value)
    y_share = [(x + r) % p for x, r in zip(x_share, noise)]
    return y_share, ServerWitness(seed, lprf, bits, traces, noise, x_share, y_share)


# Server proof


@dataclass
class SerStatement:
    """What the verifier holds for one server; mask_degree fixes the blinding length on both sides."""

    psi: Commitment
    phi: int
    share_com: Commitment
    d: int
    mask_degree: Optional[int] = None

    def __post_init__(self):
        if self.mask_degree is None:
            from vddp.config import get_mask_degree

            self.mask_degree = get_mask_degree()


def _apply_deviations(
    cs: ConstraintSystem,
    cols: Dict[str, List[int]],
    witness: ServerWitness,
    deviations: FrozenSet[str],
) -> Tuple[List[int], List[int]]:
    """Mutate the evaluation columns in place; returns (y_share, x_values) as published/used."""
    p = cs.field.modulus
    layout = cs.layout
    base = layout.row(0, 0)
    y_share = list(witness.y_share)
    x_values = list(witness.x_share)
    nu_z = cs.params.zero_params.nu
    if "bit-flip" in deviations:
        # The square-root witness no longer matches the flipped bit
        cols["B"][base] = 1 - cols["B"][base]
    if "chain-break" in deviations:
        cols["R"][base + nu_z - 1] = 1 - cols["R"][base + nu_z - 1]
    if "sign-forge" in deviations:
        sign = 1 - cols["SG"][base]
        cols["SG"][base] = sign
        cols["AUX"][base] = (2 * sign - 1) * cols["A"][base] % p
        cols["NOISE"][base] = (1 - cols["R"][base]) * cols["AUX"][base] % p
        y_share[0] = (x_values[0] + cols["NOISE"][base]) % p
    if "magnitude-forge" in deviations:
        cols["A"][base] = (cols["A"][base] + 1) % p
        cols["AUX"][base] = (2 * cols["SG"][base] - 1) * cols["A"][base] % p
        cols["NOISE"][base] = (1 - cols["R"][base]) * cols["AUX"][base] % p
        y_share[0] = (x_values[0] + cols["NOISE"][base]) % p
    if "zero-noise-forge" in deviations:
        # Claim the opposite zeroing coin and assemble the noise consistently with it
        b_z = 1 - cols["R"][base]
        cols["R"][base] = b_z
        cols["NOISE"][base] = (1 - b_z) * cols["AUX"][base] % p
        y_share[0] = (x_values[0] + cols["NOISE"][base]) % p
    if "noise-omit" in deviations:
        y_share = list(x_values)
    if "output-forge" in deviations:
        y_share[0] = (y_share[0] + 1) % p
    if "share-mismatch" in deviations:
        x_values[0] = (x_values[0] + 1) % p
        y_share[0] = (y_share[0] + 1) % p
    return y_share, x_values


def prove_ser(
    tr: Transcript,
    state: ServerState,
    stmt: SerStatement,
    cs: ConstraintSystem,
    pp: PublicParams,
    rng: Rng,
    deviations: FrozenSet[str] = NO_TAMPER,
    override_bits: Optional[Sequence[int]] = None,
) -> List[int]:
    """Write the server proof; returns the published y share."""
    domain = cs.domain
    _, witness = server_compute(state, stmt.phi, cs.params, stmt.d, cs.field, override_bits=override_bits)
    cols = assign_witness(cs, witness.lprf, witness.traces, bits=witness.bits)
    y_share, x_values = _apply_deviations(cs, cols, witness, deviations)

    polys: Dict[str, ColumnPoly] = {}
    blinds: Dict[str, List[int]] = {}
    for name in LPRF_COLUMNS:
        polys[name], blinds[name] = column_poly(cols[name], domain, rng, blind_terms=1 if name == "S" else 2,
                                                mask_degree=stmt.mask_degree)
    coms = {name: polys[name].commit(pp) for name in LPRF_COLUMNS}
    tr.send_point("ser.zeta", coms["B"])
    tr.send_point("ser.com_W", coms["W"])
    tr.send_point("ser.com_S", coms["S"])

    psi_fused = fuse_psi(state.psi, stmt.phi, pp)
    eq_stmt = EqStatement(psi_fused, coms["S"], [pp.zd_base(cs.N)], len(polys["S"].mask))
    prove_eq(tr, witness.seed, state.rho, polys["S"].mask, eq_stmt, pp, rng, extra=blinds["S"], label="ser.eq",
             tamper=deviations)
    prove_circuit(tr, cs, "lprf", polys, y_share, pp, rng, label="ser.lprf", tamper=deviations,
                  mask_degree=stmt.mask_degree)

    for j, y in enumerate(y_share):
        tr.send_scalar(f"ser.y.{j}", y)
    for name in LAP_COLUMNS:
        polys[name], _ = column_poly(cols[name], domain, rng, mask_degree=stmt.mask_degree)
        tr.send_point(f"ser.com_{name}", polys[name].commit(pp))
    x_poly, x_mask = vector_polys(x_values, state.r_share or [0], cs.share_domain)
    polys["X"] = ColumnPoly(x_poly, x_mask)
    prove_circuit(tr, cs, "lap", polys, y_share, pp, rng, label="ser.lap", tamper=deviations,
                  mask_degree=stmt.mask_degree)
    return y_share


def verify_ser(reader: TranscriptReader, stmt: SerStatement, cs: ConstraintSystem, pp: PublicParams) -> bool:
    coms = {
        "B": reader.read_point("ser.zeta"),
        "W": reader.read_point("ser.com_W"),
        "S": reader.read_point("ser.com_S"),
    }
    psi_fused = fuse_psi(stmt.psi, stmt.phi, pp)
    eq_stmt = EqStatement(psi_fused, coms["S"], [pp.zd_base(cs.N)], stmt.mask_degree + 1)
    if not verify_eq(reader, eq_stmt, pp, label="ser.eq"):
        logger.info("Server proof: seed column does not match the fused seed commitment")
        return False
    if not verify_circuit(reader, cs, "lprf", coms, [], pp, label="ser.lprf"):
        return False
    y_share = [reader.read_scalar(f"ser.y.{j}") for j in range(stmt.d)]
    for name in LAP_COLUMNS:
        coms[name] = reader.read_point(f"ser.com_{name}")
    coms["X"] = stmt.share_com
    return verify_circuit(reader, cs, "lap", coms, y_share, pp, label="ser.lap")


def read_y_share(tr: Union[Transcript, TranscriptReader], d: int) -> List[int]:
    """The published y share from a server transcript."""
    out = []
    for m in tr.messages:
        if m.label.startswith("ser.y."):
            out.append(int.from_bytes(m.data, "little"))
    return out[:d]


def pi_ser(
    state: ServerState,
    phi: int,
    share_com: Commitment,
    cs: ConstraintSystem,
    pp: PublicParams,
    rng: Optional[Rng] = None,
    source: Optional[ChallengeSource] = None,
    deviations: FrozenSet[str] = NO_TAMPER,
) -> Tuple[bool, List[int], Transcript]:
    """Server proof run against its verifier; returns (accepted, y_share, transcript)."""
    unknown = set(deviations) - set(SERVER_DEVIATIONS) - {"circuit.eval", "eq.response"}
    if unknown:
        raise ParameterError(f"unknown server deviation: {sorted(unknown)[0]}")
    stmt = SerStatement(state.psi, phi, share_com, cs.layout.d)
    accepted, tr = _run(
        lambda t, prng: prove_ser(t, state, stmt, cs, pp, prng, deviations=deviations),
        lambda reader: verify_ser(reader, stmt, cs, pp),
        pp, rng, source, "vddlm.ser",
    )
    return accepted, read_y_share(tr, cs.layout.d), tr


# Client data and proof


@dataclass
class ClientSubmission:
    """A client's bit vector, its shares and per-server share commitments."""

    x: List[int]
    coord_rand: List[int]
    blind: int
    shares: ShareSet
    share_coms: List[ShareCommitment]

    @property
    def randomness(self) -> List[int]:
        return [self.blind, sum(self.coord_rand)]


def client_submit(
    x: Sequence[int],
    n_ser: int,
    cs: ConstraintSystem,
    pp: PublicParams,
    rng: Rng,
) -> ClientSubmission:
    """Share x among n_ser servers with randomness [b0, sum r_k] so the Lagrange-basis proof applies."""
    if len(x) != cs.layout.d:
        raise ParameterError(f"client vector has length {len(x)}, expected {cs.layout.d}")
    p = pp.field.modulus
    coord_rand = rng.scalars(len(x))
    blind = rng.scalar()
    randomness = [blind, sum(coord_rand) % p]
    shares = secret_share([v % p for v in x], n_ser, rng, randomness=randomness, field_=pp.field)
    coms = [commit_share(s, r, pp, cs.share_domain) for s, r in zip(shares.shares, shares.rand_shares)]
    return ClientSubmission(list(x), coord_rand, blind, shares, coms)


def _blind_relation(point: Commitment, base: Commitment, pp: PublicParams) -> LinearRelation:
    return LinearRelation([Equation(point, [(base, "b")])], pp)


def prove_cli(tr: Transcript, sub: ClientSubmission, cs: ConstraintSystem, pp: PublicParams, rng: Rng,
              tamper: FrozenSet[str] = NO_TAMPER) -> None:
    """Per-coordinate OR-proofs on C_k = x_k G_k + r_k h, plus knowledge of the blinding term."""
    bk = pp.backend
    bases = pp.lagrange_bases(cs.share_domain)
    coords = []
    for k, (xk, rk) in enumerate(zip(sub.x, sub.coord_rand)):
        c_k = bk.msm([bases[k], pp.h], [xk, rk])
        coords.append(c_k)
        tr.send_point(f"cli.C.{k}", c_k)
    zd = pp.zd_base(cs.layout.D)
    blind_point = bk.mul(zd, sub.blind)
    tr.send_point("cli.blind", blind_point)
    for k, (xk, rk) in enumerate(zip(sub.x, sub.coord_rand)):
        prove_or(tr, xk, rk, OrStatement(coords[k], bases[k]), pp, rng, label=f"cli.or.{k}", tamper=tamper)
    prove_relation(_blind_relation(blind_point, zd, pp), {"b": sub.blind}, tr, rng, "cli.blind_pok")


def verify_cli(reader: TranscriptReader, share_coms: Sequence[ShareCommitment], cs: ConstraintSystem,
               pp: PublicParams) -> bool:
    bk = pp.backend
    d = cs.layout.d
    bases = pp.lagrange_bases(cs.share_domain)
    coords = [reader.read_point(f"cli.C.{k}") for k in range(d)]
    blind_point = reader.read_point("cli.blind")
    try:
        full = rec_data_com(share_coms, pp)
    except ParameterError as e:
        logger.info("Client proof: %s", e)
        return False
    if not bk.eq(bk.add(bk.sum(coords), blind_point), full.point):
        logger.info("Client proof: coordinate commitments do not sum to the shared commitment")
        return False
    for k in range(d):
        if not verify_or(reader, OrStatement(coords[k], bases[k]), pp, label=f"cli.or.{k}"):
            logger.info("Client proof: coordinate %d is not a bit", k)
            return False
    zd = pp.zd_base(cs.layout.D)
    return verify_relation(_blind_relation(blind_point, zd, pp), reader, "cli.blind_pok")


def pi_cli(
    sub: ClientSubmission,
    cs: ConstraintSystem,
    pp: PublicParams,
    rng: Optional[Rng] = None,
    source: Optional[ChallengeSource] = None,
    tamper: FrozenSet[str] = NO_TAMPER,
) -> Tuple[bool, Transcript]:
    return _run(
        lambda tr, prng: prove_cli(tr, sub, cs, pp, prng, tamper=tamper),
        lambda reader: verify_cli(reader, sub.share_coms, cs, pp),
        pp, rng, source, "vddlm.cli",
    )


# Aggregation


def aggregate_server_view(
    submissions: Sequence[ClientSubmission],
    server: int,
    accepted_clients: Sequence[int],
    pp: PublicParams,
    d: int,
) -> Tuple[List[int], List[int], Commitment]:
    """Server `server`'s aggregated share, randomness and the verifier's aggregated commitment over J*."""
    p = pp.field.modulus
    x_agg = [0] * d
    r_agg: List[int] = []
    coms = []
    for j in accepted_clients:
        sub = submissions[j]
        share = sub.shares.shares[server]
        rand = sub.shares.rand_shares[server]
        x_agg = [(a + b) % p for a, b in zip(x_agg, share)]
        r_agg = [(a + b) % p for a, b in zip(r_agg, rand)] if r_agg else [v % p for v in rand]
        coms.append(sub.share_coms[server])
    if not coms:
        r_agg = [0, 0]
        return x_agg, r_agg, commit_vector(x_agg, r_agg, share_domain(d, pp.field), pp)
    return x_agg, r_agg, aggr_share_com(coms, pp).point


def aggregate_outputs(
    accepted_servers: Sequence[int],
    y_shares: Dict[int, Sequence[int]],
    n_ser: int,
    field_: PrimeField = BLS_FIELD,
) -> Optional[List[int]]:
    """Sum of all servers' y shares decoded as signed integers; None (abort) unless every server was accepted."""
    if set(accepted_servers) != set(range(n_ser)):
        logger.warning("Aborting aggregation: accepted servers %s of %d", sorted(accepted_servers), n_ser)
        return None
    shares = [y_shares[i] for i in range(n_ser)]
    p = field_.modulus
    return [field_.decode_signed(sum(col) % p) for col in zip(*shares)]


@dataclass
class VddlmRun:
    """Outcome of a standalone (single block) VDDLM execution."""

    accepted_clients: List[int]
    accepted_servers: List[int]
    output: Optional[List[int]]
    true_aggregate: List[int]
    noises: Dict[int, List[int]]
    transcripts: Dict[str, Transcript] = dc_field(default_factory=dict)


def run_vddlm(
    data: Sequence[Sequence[int]],
    n_ser: int,
    params: LaplaceParams,
    pp: PublicParams,
    rng: Rng,
    cs: Optional[ConstraintSystem] = None,
    server_deviations: Optional[Dict[int, FrozenSet[str]]] = None,
    sigmas: Optional[Dict[int, int]] = None,
) -> VddlmRun:
    """Clients share, servers commit, coins are drawn, then client and server proofs run and outputs aggregate."""
    from vddp.constraints import build_constraints

    d = len(data[0])
    cs = cs or build_constraints(params, d, pp.field)
    server_deviations = server_deviations or {}
    sigmas = sigmas or {}
    subs = [client_submit(x, n_ser, cs, pp, rng.child(f"client-{j}")) for j, x in enumerate(data)]
    states = [commit_ob(pp, rng.child(f"server-{i}"), sigmas.get(i)) for i in range(n_ser)]
    verifier = rng.child("verifier")
    phis = [verifier.scalar() for _ in range(n_ser)]

    transcripts: Dict[str, Transcript] = {}
    accepted_clients = []
    for j, sub in enumerate(subs):
        ok, tr = pi_cli(sub, cs, pp, verifier.child(f"cli-{j}"))
        transcripts[f"cli-{j}"] = tr
        if ok:
            accepted_clients.append(j)
    accepted_servers, y_shares, noises = [], {}, {}
    for i, state in enumerate(states):
        state.x_share, state.r_share, share_com = aggregate_server_view(subs, i, accepted_clients, pp, d)
        _, witness = server_compute(state, phis[i], params, d, pp.field)
        noises[i] = witness.noise
        ok, y_share, tr = pi_ser(state, phis[i], share_com, cs, pp, verifier.child(f"ser-{i}"),
                                 deviations=server_deviations.get(i, NO_TAMPER))
        transcripts[f"ser-{i}"] = tr
        y_shares[i] = y_share
        if ok:
            accepted_servers.append(i)
    true_aggregate = [sum(data[j][k] for j in accepted_clients) for k in range(d)]
    return VddlmRun(
        accepted_clients=accepted_clients,
        accepted_servers=accepted_servers,
        output=aggregate_outputs(accepted_servers, y_shares, n_ser, pp.field),
        true_aggregate=true_aggregate,
        noises=noises,
        transcripts=transcripts,
    )
