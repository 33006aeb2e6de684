"""Session state schema and the phase machine of one I2DP run."""

from enum import IntEnum
from typing import Any, Dict, List, Optional, TypedDict

from vddp.errors import PhaseError


class Phase(IntEnum):
    SETUP = 0
    COMMIT = 1
    COIN = 2
    CLI_PROOFS = 3
    SER_PROOFS = 4
    AGGREGATE = 5
    DONE = 6

    @property
    def tag(self) -> str:
        return self.name.lower().replace("_", "-")


class SessionState(TypedDict):
    """Everything the verifier records while a session progresses."""

    session_id: str
    phase: Phase
    n_cli: int
    n_ser: int

    # Commit phase
    share_commitments: Dict[int, List[bytes]]  # client -> encoded commitment per server
    psi: Dict[int, bytes]  # server (vddlm) or client (vrr) -> encoded seed commitment

    # Public coins, assigned once every psi is recorded
    phi: Dict[int, int]

    # Exclusion sets
    accepted_clients: List[int]  # J*
    accepted_servers: List[int]  # I*

    transcripts: Dict[str, bytes]
    outcome: Optional[Dict[str, Any]]


def create_initial_state(session_id: str, n_cli: int, n_ser: int) -> SessionState:
    """Create the state of a new session."""
    return {
        "session_id": session_id,
        "phase": Phase.SETUP,
        "n_cli": n_cli,
        "n_ser": n_ser,
        "share_commitments": {},
        "psi": {},
        "phi": {},
        "accepted_clients": [],
        "accepted_servers": [],
        "transcripts": {},
        "outcome": None,
    }


def advance_phase(state: SessionState, target: Phase) -> None:
    """Move to the next phase; skipping or going back raises PhaseError."""
    if target != state["phase"] + 1:
        raise PhaseError(f"cannot move from {state['phase'].tag} to {target.tag}")
    state["phase"] = target


def require_phase(state: SessionState, phase: Phase) -> None:
    if state["phase"] != phase:
        raise PhaseError(f"step requires phase {phase.tag}, session is in {state['phase'].tag}")


def record_psi(state: SessionState, party: int, psi: bytes) -> None:
    require_phase(state, Phase.COMMIT)
    state["psi"][party] = psi


def record_share_commitments(state: SessionState, client: int, coms: List[bytes]) -> None:
    require_phase(state, Phase.COMMIT)
    state["share_commitments"][client] = list(coms)


def assign_public_coin(state: SessionState, party: int, phi: int, expected_parties: int) -> None:
    """Record phi for one party; only legal once all seed commitments are in."""
    require_phase(state, Phase.COIN)
    if len(state["psi"]) < expected_parties:
        raise PhaseError("public coins are drawn only after every seed commitment is recorded")
    if party not in state["psi"]:
        raise PhaseError(f"party {party} has no seed commitment")
    state["phi"][party] = phi
