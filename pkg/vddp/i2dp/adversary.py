"""Deviation menu for malicious clients and servers."""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Set

from vddp.errors import ParameterError
from vddp.models import AdversaryStep, SessionConfig

logger = logging.getLogger(__name__)

# kind -> role it applies to
ADVERSARY_KINDS: Dict[str, str] = {
    "invalid-data": "client",
    "bit-flip": "server",
    "noise-omit": "server",
    "sigma-copy": "server",
    "output-forge": "server",
    "chain-break": "server",
    "sign-forge": "server",
    "magnitude-forge": "server",
    "zero-noise-forge": "server",
    "share-mismatch": "server",
    "bad-response": "client",
    "bad-com-z": "client",
    "bad-quotient": "client",
    "bad-prod-response": "client",
    "sigma-outside-domain": "client",
}

# Client kinds of the randomized-response proof and the prover tamper flag each sets
VRR_TAMPER = {
    "bad-response": "vrr.y",
    "bad-com-z": "vrr.com_z",
    "bad-quotient": "evsc.quotient",
    "bad-prod-response": "prod.response",
}


@dataclass
class AdversaryPlan:
    clients: Dict[int, Set[str]] = field(default_factory=dict)
    servers: Dict[int, Set[str]] = field(default_factory=dict)
    sigma_copies: Dict[int, int] = field(default_factory=dict)

    def client_kinds(self, j: int) -> Set[str]:
        return self.clients.get(j, set())

    def server_deviations(self, i: int) -> FrozenSet[str]:
        """Deviations handed to the server prover (sigma-copy acts at commit time)."""
        return frozenset(k for k in self.servers.get(i, set()) if k != "sigma-copy")

    def vrr_tamper(self, j: int) -> FrozenSet[str]:
        return frozenset(VRR_TAMPER[k] for k in self.client_kinds(j) if k in VRR_TAMPER)

    @property
    def empty(self) -> bool:
        return not (self.clients or self.servers)


def _validate(step: AdversaryStep) -> None:
    role = ADVERSARY_KINDS.get(step.kind)
    if role is None:
        raise ParameterError(f"unknown deviation kind: {step.kind}")
    if role != step.role:
        raise ParameterError(f"deviation {step.kind} applies to a {role}, not a {step.role}")


def inject_adversary(config: SessionConfig, script: Iterable[AdversaryStep]) -> SessionConfig:
    """Copy of config with the script's deviations appended."""
    steps: List[AdversaryStep] = [s if isinstance(s, AdversaryStep) else AdversaryStep(**s) for s in script]
    for step in steps:
        _validate(step)
    return SessionConfig.model_validate(
        {**config.model_dump(), "adversary": [s.model_dump() for s in list(config.adversary) + steps]}
    )


def plan_from(config: SessionConfig) -> AdversaryPlan:
    plan = AdversaryPlan()
    for step in config.adversary:
        _validate(step)
        book = plan.clients if step.role == "client" else plan.servers
        book.setdefault(step.index, set()).add(step.kind)
        if step.kind == "sigma-copy":
            target = step.target if step.target is not None else (step.index - 1) % config.n_ser
            if target == step.index:
                raise ParameterError("sigma-copy needs a different target server")
            plan.sigma_copies[step.index] = target
    if not plan.empty:
        logger.info("Session %s runs with deviations: clients=%s servers=%s", config.session_id,
                    {k: sorted(v) for k, v in plan.clients.items()}, {k: sorted(v) for k, v in plan.servers.items()})
    return plan


def corrupt_vector(x: List[int]) -> List[int]:
    """A client vector with a coordinate outside {0, 1}."""
    out = list(x)
    out[0] = 2
    return out
