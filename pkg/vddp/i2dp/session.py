"""Session runner: commit, coin, client proofs, server proofs, aggregation."""

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from vddp.commit import PublicParams, setup
from vddp.config import get_challenge_mode
from vddp.constraints import ConstraintSystem, build_constraints
from vddp.groups import get_backend
from vddp.i2dp.adversary import AdversaryPlan, corrupt_vector, plan_from
from vddp.i2dp.metrics import SessionMetrics
from vddp.i2dp.state import (
    Phase,
    SessionState,
    advance_phase,
    assign_public_coin,
    create_initial_state,
    record_psi,
    record_share_commitments,
)
from vddp.i2dp.transport import Message, Transport, get_transport
from vddp.models import SessionConfig
from vddp.randomness import derive_bernoulli
from vddp.rng import Rng
from vddp.sharing import ShareCommitment
from vddp.sigma import _safe
from vddp.transcript import ChallengeSource, Transcript, TranscriptReader
from vddp.vddlm import (
    SerStatement,
    aggregate_outputs,
    aggregate_server_view,
    client_submit,
    commit_ob,
    prove_cli,
    prove_ser,
    read_y_share,
    server_compute,
    verify_cli,
    verify_ser,
)
from vddp.vrr import (
    VrrStatement,
    build_scheme,
    histogram_estimate,
    new_client,
    observed_histogram,
    prove_vrr,
    read_response,
    verify_vrr,
)

logger = logging.getLogger(__name__)


@dataclass
class SessionOutcome:
    """What the verifier ends a session with."""

    session_id: str
    mechanism: str
    accepted_clients: List[int]  # J*
    accepted_servers: List[int]  # I*
    output: Optional[List[Any]]
    aborted: bool
    transcripts: Dict[str, Transcript] = field(default_factory=dict)
    metrics: SessionMetrics = field(default_factory=SessionMetrics)
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "session_id": self.session_id,
            "mechanism": self.mechanism,
            "accepted_clients": self.accepted_clients,
            "accepted_servers": self.accepted_servers,
            "output": self.output,
            "aborted": self.aborted,
            "metrics": self.metrics.to_dict(),
            "extra": self.extra,
        }


class _Session:
    """Per-run context shared by the phase steps."""

    def __init__(self, config: SessionConfig, transport: Transport):
        self.config = config
        self.transport = transport
        self.rng = Rng(config.seed)
        self.verifier_rng = self.rng.child("verifier")
        self.backend = get_backend(config.backend)
        self.mode = config.challenge_mode or get_challenge_mode()
        self.plan: AdversaryPlan = plan_from(config)
        self.state: SessionState = create_initial_state(config.session_id, config.n_cli, config.n_ser)
        self.metrics = SessionMetrics()
        self.transcripts: Dict[str, Transcript] = {}
        self.pp: Optional[PublicParams] = None

    def advance(self, phase: Phase) -> None:
        advance_phase(self.state, phase)
        logger.debug("Session %s entered %s", self.config.session_id, phase.tag)

    def send(self, role: str, index: int, payload: bytes) -> bytes:
        phase = self.state["phase"].tag
        received = self.transport.deliver(Message(self.config.session_id, phase, role, index, payload))
        return received.payload

    def encode_point(self, point) -> bytes:
        return self.backend.encode_g1(point)

    def prove_and_check(
        self,
        key: str,
        role: str,
        index: int,
        domain: str,
        prove: Callable[[Transcript, Rng], Any],
        verify: Callable[[TranscriptReader], bool],
        prover_rng: Rng,
    ) -> bool:
        """Prover writes a transcript, the bytes cross the transport, the verifier reads them back."""
        source = ChallengeSource(mode=self.mode, rng=self.verifier_rng.child(key))
        tr = Transcript(self.backend, source, domain=domain, field_=self.pp.field)
        with self.metrics.timer(role):
            prove(tr, prover_rng)
        payload = self.send(role, index, tr.to_bytes())
        self.metrics.record_proof(key, len(payload))
        reader = TranscriptReader.from_bytes(
            payload, self.backend, mode=self.mode, issued=list(source.issued), domain=domain, field_=self.pp.field
        )
        ops_before = sum(self.backend.snapshot().values())
        with self.metrics.timer("verifier"):
            accepted = _safe(verify, reader)
        self.metrics.verifier_ops[key] = sum(self.backend.snapshot().values()) - ops_before
        self.transcripts[key] = tr
        self.state["transcripts"][key] = payload
        if not accepted:
            logger.warning("Session %s: %s %d rejected", self.config.session_id, role, index)
        return accepted

    def received(self, key: str) -> TranscriptReader:
        """The verifier's copy of a proof as it arrived over the transport."""
        return TranscriptReader.from_bytes(self.state["transcripts"][key], self.backend, mode=self.mode,
                                           field_=self.pp.field)

    def finish(self, output: Optional[List[Any]], extra: Dict[str, Any]) -> SessionOutcome:
        self.advance(Phase.DONE)
        self.metrics.phase_bytes.update(self.transport.bytes_by_phase)
        self.metrics.phase_messages.update(self.transport.messages_by_phase)
        self.metrics.group_ops = self.backend.snapshot()
        outcome = SessionOutcome(
            session_id=self.config.session_id,
            mechanism=self.config.mechanism,
            accepted_clients=list(self.state["accepted_clients"]),
            accepted_servers=list(self.state["accepted_servers"]),
            output=output,
            aborted=output is None,
            transcripts=self.transcripts,
            metrics=self.metrics,
            extra=extra,
        )
        self.state["outcome"] = outcome.to_dict()
        return outcome


def _client_block(config: SessionConfig) -> List[int]:
    """Servers the (single) client block shares among."""
    if config.topology is None:
        return list(range(config.n_ser))
    return sorted(set(config.topology[0]))


# VDDLM


def _run_vddlm(s: _Session) -> SessionOutcome:
    cfg = s.config
    settings = cfg.vddlm
    d = settings.d
    params = derive_bernoulli(Fraction(settings.t_scale), settings.gamma, settings.nu,
                              allow_truncation=settings.allow_truncation)
    cs: ConstraintSystem = build_constraints(params, d)
    s.pp = pp = setup(cs.required_degree, seed=cfg.seed, backend=s.backend)
    block = _client_block(cfg)

    data_rng = s.rng.child("data")
    data = settings.data or [data_rng.bits(d) for _ in range(cfg.n_cli)]
    inputs = [corrupt_vector(x) if "invalid-data" in s.plan.client_kinds(j) else list(x) for j, x in enumerate(data)]

    s.advance(Phase.COMMIT)
    subs = []
    for j, x in enumerate(inputs):
        with s.metrics.timer("client"):
            sub = client_submit(x, len(block), cs, pp, s.rng.child(f"client-{j}"))
        encoded = [s.encode_point(c.point) for c in sub.share_coms]
        s.send("client", j, b"".join(encoded))
        record_share_commitments(s.state, j, encoded)
        subs.append(sub)

    servers = {}
    for i in range(cfg.n_ser):
        if i not in s.plan.sigma_copies:
            servers[i] = commit_ob(pp, s.rng.child(f"server-{i}"))
    for i, target in s.plan.sigma_copies.items():
        seen = {i}
        while target in s.plan.sigma_copies and target not in seen:
            seen.add(target)
            target = s.plan.sigma_copies[target]
        if target not in servers:
            servers[target] = commit_ob(pp, s.rng.child(f"server-{target}"))
        servers[i] = commit_ob(pp, s.rng.child(f"server-{i}"), sigma=servers[target].sigma)
    for i in range(cfg.n_ser):
        psi = s.encode_point(servers[i].psi)
        s.send("server", i, psi)
        record_psi(s.state, i, psi)

    s.advance(Phase.COIN)
    for i in range(cfg.n_ser):
        phi = s.verifier_rng.scalar()
        s.send("verifier", i, phi.to_bytes(32, "little"))
        assign_public_coin(s.state, i, phi, cfg.n_ser)

    s.advance(Phase.CLI_PROOFS)
    fingerprint = pp.fingerprint()
    for j, sub in enumerate(subs):
        recorded = [ShareCommitment(s.backend.decode_g1(c), fingerprint) for c in s.state["share_commitments"][j]]
        ok = s.prove_and_check(
            f"client-{j}", "client", j, "vddlm.cli",
            lambda tr, prng, sub=sub: prove_cli(tr, sub, cs, pp, prng),
            lambda reader, coms=recorded: verify_cli(reader, coms, cs, pp),
            s.rng.child(f"client-{j}").child("prover"),
        )
        if ok:
            s.state["accepted_clients"].append(j)
    accepted_clients = s.state["accepted_clients"]

    s.advance(Phase.SER_PROOFS)
    y_shares: Dict[int, List[int]] = {}
    noises: Dict[int, List[int]] = {}
    for i in range(cfg.n_ser):
        server = servers[i]
        position = block.index(i) if i in block else 0
        members = accepted_clients if i in block else []
        server.x_share, server.r_share, share_com = aggregate_server_view(subs, position, members, pp, d)
        phi = s.state["phi"][i]
        _, witness = server_compute(server, phi, params, d, pp.field)
        noises[i] = witness.noise
        stmt = SerStatement(s.backend.decode_g1(s.state["psi"][i]), phi, share_com, d)
        def _prove(tr, prng, server=server, stmt=stmt, i=i):
            prove_ser(tr, server, stmt, cs, pp, prng, deviations=s.plan.server_deviations(i))

        ok = s.prove_and_check(
            f"server-{i}", "server", i, "vddlm.ser", _prove,
            lambda reader, stmt=stmt: verify_ser(reader, stmt, cs, pp),
            s.rng.child(f"server-{i}").child("prover"),
        )
        y_shares[i] = read_y_share(s.received(f"server-{i}"), d)
        if ok:
            s.state["accepted_servers"].append(i)

    s.advance(Phase.AGGREGATE)
    output = aggregate_outputs(s.state["accepted_servers"], y_shares, cfg.n_ser, pp.field)
    true_aggregate = [sum(inputs[j][k] for j in accepted_clients) for k in range(d)]
    extra = {
        "n_lap": params.n_lap,
        "gamma": params.gamma,
        "true_aggregate": true_aggregate,
        "noises": {str(i): noise for i, noise in noises.items()},
        "constraints": cs.num_constraints,
    }
    return s.finish(output, extra)


# VRR


def _run_vrr(s: _Session) -> SessionOutcome:
    cfg = s.config
    settings = cfg.vrr
    scheme = build_scheme(settings.k, [Fraction(p) for p in settings.probs], settings.omega_bits)
    s.pp = pp = setup(scheme.omega_size + 2, seed=cfg.seed, backend=s.backend)
    p = pp.field.modulus
    bk = pp.backend

    data_rng = s.rng.child("data")
    classes = settings.data or [data_rng.index(scheme.K) for _ in range(cfg.n_cli)]

    s.advance(Phase.COMMIT)
    clients = []
    for j, k in enumerate(classes):
        kinds = s.plan.client_kinds(j)
        with s.metrics.timer("client"):
            client = new_client(scheme, k, pp, s.rng.child(f"client-{j}"))
            if "invalid-data" in kinds:
                client.x = 2
                client.com = bk.msm([pp.g, pp.h], [client.x, client.r_x])
            if "sigma-outside-domain" in kinds:
                client.sigma_point = pp.field.generator % p
                client.psi = bk.msm([pp.g, pp.h], [client.sigma_point, client.r_sigma])
        com, psi = s.encode_point(client.com), s.encode_point(client.psi)
        s.send("client", j, com + psi)
        record_share_commitments(s.state, j, [com])
        record_psi(s.state, j, psi)
        clients.append(client)

    s.advance(Phase.COIN)
    for j in range(cfg.n_cli):
        i_phi = s.verifier_rng.index(scheme.omega_size)
        s.send("verifier", j, i_phi.to_bytes(4, "big"))
        assign_public_coin(s.state, j, i_phi, cfg.n_cli)

    s.advance(Phase.CLI_PROOFS)
    responses: Dict[int, int] = {}
    for j, client in enumerate(clients):
        stmt = VrrStatement(
            bk.decode_g1(s.state["share_commitments"][j][0]),
            bk.decode_g1(s.state["psi"][j]),
            s.state["phi"][j],
        )

        def _prove(tr, prng, client=client, stmt=stmt, j=j):
            prove_vrr(tr, client, scheme, stmt, pp, prng, tamper=s.plan.vrr_tamper(j))

        ok = s.prove_and_check(
            f"client-{j}", "client", j, "vrr", _prove,
            lambda reader, stmt=stmt: verify_vrr(reader, stmt, scheme, pp),
            s.rng.child(f"client-{j}").child("prover"),
        )
        responses[j] = read_response(s.received(f"client-{j}"))
        if ok:
            s.state["accepted_clients"].append(j)

    # Servers play no part in randomized response
    s.advance(Phase.SER_PROOFS)
    s.advance(Phase.AGGREGATE)
    accepted = s.state["accepted_clients"]
    observed = observed_histogram(scheme, [responses[j] for j in accepted])
    estimate = histogram_estimate(observed, scheme.A, scheme.omega_size)
    true_counts = [0] * scheme.K
    for j in accepted:
        true_counts[classes[j]] += 1
    extra = {
        "K": scheme.K,
        "omega_size": scheme.omega_size,
        "multiplicities": list(scheme.A),
        "realized_epsilon": float(scheme.realized_eps),
        "observed": observed,
        "true_histogram": true_counts,
        "estimate_exact": [str(v) for v in estimate],
    }
    return s.finish([float(v) for v in estimate], extra)


def dump_transcripts(outcome: SessionOutcome, directory: str) -> Path:
    """Write `<dir>/<session>/<phase>/<role>-<index>.bin` and a `.json` hex dump next to each."""
    root = Path(directory) / outcome.session_id
    for key, tr in outcome.transcripts.items():
        role, _, _ = key.partition("-")
        phase = Phase.CLI_PROOFS if role == "client" else Phase.SER_PROOFS
        target = root / phase.tag
        target.mkdir(parents=True, exist_ok=True)
        (target / f"{key}.bin").write_bytes(tr.to_bytes())
        (target / f"{key}.json").write_text(tr.to_json(), encoding="utf-8")
    (root / "outcome.json").write_text(json.dumps(outcome.to_dict(), indent=2), encoding="utf-8")
    logger.info("Dumped %d transcripts to %s", len(outcome.transcripts), root)
    return root


def run_session(config: SessionConfig, transport: Optional[Transport] = None) -> SessionOutcome:
    """
    Run one session end to end.

    Args:
        config: Validated session configuration
        transport: Channel to use; defaults to the one named in the config

    Returns:
        SessionOutcome with J*, I*, the output (None on abort), transcripts and metrics

    Raises:
        TransportError: The channel failed (a session error, not a protocol reject)
    """
    owned = transport is None
    transport = transport or get_transport(config.transport)
    try:
        s = _Session(config, transport)
        s.backend.reset_counters()
        runner = _run_vddlm if config.mechanism == "vddlm" else _run_vrr
        outcome = runner(s)
    finally:
        if owned:
            transport.close()
    logger.info(
        "Session %s done: J*=%s I*=%s aborted=%s",
        config.session_id, outcome.accepted_clients, outcome.accepted_servers, outcome.aborted,
    )
    if config.dump_dir:
        dump_transcripts(outcome, config.dump_dir)
    return outcome
