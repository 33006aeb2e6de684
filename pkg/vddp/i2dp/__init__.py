"""Interactive distributed proof sessions between clients, servers and a verifier."""

from vddp.i2dp.adversary import ADVERSARY_KINDS, AdversaryPlan, inject_adversary, plan_from
from vddp.i2dp.metrics import SessionMetrics, metrics
from vddp.i2dp.session import SessionOutcome, dump_transcripts, run_session
from vddp.i2dp.state import Phase, SessionState
from vddp.i2dp.transport import MemoryTransport, Message, TcpTransport, Transport, get_transport

__all__ = [
    "ADVERSARY_KINDS",
    "AdversaryPlan",
    "MemoryTransport",
    "Message",
    "Phase",
    "SessionMetrics",
    "SessionOutcome",
    "SessionState",
    "TcpTransport",
    "Transport",
    "dump_transcripts",
    "get_transport",
    "inject_adversary",
    "metrics",
    "plan_from",
    "run_session",
]
