"""Wall-clock and communication accounting for sessions."""

import time
from collections import Counter
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, Optional


@dataclass
class SessionMetrics:
    role_seconds: Dict[str, float] = field(default_factory=Counter)
    phase_bytes: Dict[str, int] = field(default_factory=Counter)
    phase_messages: Dict[str, int] = field(default_factory=Counter)
    proof_bytes: Dict[str, int] = field(default_factory=dict)
    group_ops: Dict[str, int] = field(default_factory=dict)
    verifier_ops: Dict[str, int] = field(default_factory=dict)

    @contextmanager
    def timer(self, role: str) -> Iterator[None]:
        start = time.perf_counter()
        try:
            yield
        finally:
            self.role_seconds[role] += time.perf_counter() - start

    def record_proof(self, party: str, size: int) -> None:
        self.proof_bytes[party] = size

    @property
    def total_bytes(self) -> int:
        return sum(self.phase_bytes.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "role_seconds": {k: round(v, 6) for k, v in self.role_seconds.items()},
            "phase_bytes": dict(self.phase_bytes),
            "phase_messages": dict(self.phase_messages),
            "proof_bytes": dict(self.proof_bytes),
            "total_bytes": self.total_bytes,
            "group_ops": dict(self.group_ops),
            "verifier_ops": dict(self.verifier_ops),
        }


def metrics(outcome: Optional[Any] = None) -> Dict[str, Any]:
    """Metrics dictionary of a finished session; an absent session gives zero counters."""
    if outcome is None or getattr(outcome, "metrics", None) is None:
        return SessionMetrics().to_dict()
    return outcome.metrics.to_dict()
