"""Protocol transcripts and challenge sources.

A prover writes messages into a ``Transcript``; challenges come from a
``ChallengeSource`` that is either the verifier's own randomness (interactive) or a
hash of everything sent so far (Fiat-Shamir). Verifiers read the same transcript back
through a ``TranscriptReader`` which checks that every challenge is legitimate.
"""

import hashlib
import json
import logging
import struct
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, Dict, List, Optional

from vddp.algebra import BLS_FIELD, PrimeField
from vddp.errors import MalformedMessageError, ParameterError
from vddp.groups import G1, GroupBackend
from vddp.rng import Rng

logger = logging.getLogger(__name__)

INTERACTIVE = "interactive"
FIAT_SHAMIR = "fiat-shamir"
REPLAY = "replay"
CHALLENGE_MODES = (INTERACTIVE, FIAT_SHAMIR)

SCALAR_BYTES = 32


class Role(IntEnum):
    PROVER = 1
    VERIFIER = 2


@dataclass
class TranscriptMessage:
    role: Role
    label: str
    data: bytes


@dataclass
class ChallengeSource:
    """Where verifier challenges come from."""

    mode: str = INTERACTIVE
    rng: Optional[Rng] = None
    issued: List[int] = field(default_factory=list)

    def __post_init__(self):
        if self.mode not in CHALLENGE_MODES + (REPLAY,):
            raise ParameterError(f"unknown challenge mode: {self.mode}")
        if self.mode == INTERACTIVE and self.rng is None:
            self.rng = Rng()


def default_source(mode: Optional[str] = None, rng: Optional[Rng] = None) -> ChallengeSource:
    if mode is None:
        from vddp.config import get_challenge_mode

        mode = get_challenge_mode()
    return ChallengeSource(mode=mode, rng=rng)


def _absorb(hasher: "hashlib._Hash", role: Role, data: bytes) -> None:
    hasher.update(struct.pack(">BI", int(role), len(data)))
    hasher.update(data)


def _fs_challenge(hasher: "hashlib._Hash", label: str, field_: PrimeField) -> int:
    h = hasher.copy()
    h.update(b"challenge:" + label.encode())
    return int.from_bytes(h.digest(), "big") % field_.modulus


class Transcript:
    """Ordered prover/verifier messages of one protocol run."""

    def __init__(
        self,
        backend: GroupBackend,
        source: Optional[ChallengeSource] = None,
        domain: str = "vddp",
        field_: PrimeField = BLS_FIELD,
    ):
        self.backend = backend
        self.source = source or ChallengeSource(mode=FIAT_SHAMIR)
        self.domain = domain
        self.field = field_
        self.messages: List[TranscriptMessage] = []
        self.issued: List[int] = []
        self._hasher = hashlib.sha512(domain.encode())

    def __len__(self) -> int:
        return len(self.messages)

    @property
    def size_bytes(self) -> int:
        return sum(len(m.data) for m in self.messages)

    @property
    def prover_bytes(self) -> int:
        return sum(len(m.data) for m in self.messages if m.role == Role.PROVER)

    def _append(self, role: Role, label: str, data: bytes) -> None:
        self.messages.append(TranscriptMessage(role, label, data))
        _absorb(self._hasher, role, data)

    def send(self, label: str, data: bytes) -> None:
        self._append(Role.PROVER, label, bytes(data))

    def send_scalar(self, label: str, value: int) -> None:
        self.send(label, (value % self.field.modulus).to_bytes(SCALAR_BYTES, "little"))

    def send_point(self, label: str, point: G1) -> None:
        self.send(label, self.backend.encode_g1(point))

    def send_flag(self, label: str, flag: int) -> None:
        self.send(label, bytes([flag & 0xFF]))

    def challenge(self, label: str) -> int:
        """Draw the next verifier challenge and log it in the transcript."""
        if self.source.mode == REPLAY:
            raise ParameterError("replay transcripts only take recorded challenges")
        if self.source.mode == FIAT_SHAMIR:
            value = _fs_challenge(self._hasher, label, self.field)
        else:
            value = self.source.rng.scalar()
        self.source.issued.append(value)
        self.issued.append(value)
        self._append(Role.VERIFIER, label, value.to_bytes(SCALAR_BYTES, "little"))
        return value

    def record_challenge(self, label: str, value: int) -> None:
        """Place a chosen challenge (simulators pick challenges first)."""
        self._append(Role.VERIFIER, label, (value % self.field.modulus).to_bytes(SCALAR_BYTES, "little"))

    def to_bytes(self) -> bytes:
        out = bytearray()
        for m in self.messages:
            out += struct.pack(">BI", int(m.role), len(m.data))
            out += m.data
        return bytes(out)

    @staticmethod
    def messages_from_bytes(data: bytes) -> List[TranscriptMessage]:
        messages = []
        offset = 0
        while offset < len(data):
            if offset + 5 > len(data):
                raise MalformedMessageError("truncated message header")
            role_byte, length = struct.unpack(">BI", data[offset: offset + 5])
            offset += 5
            if role_byte not in (Role.PROVER, Role.VERIFIER):
                raise MalformedMessageError(f"unknown role tag {role_byte}")
            payload = data[offset: offset + length]
            if len(payload) != length:
                raise MalformedMessageError("truncated message payload")
            offset += length
            messages.append(TranscriptMessage(Role(role_byte), "", payload))
        return messages

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "domain": self.domain,
            "mode": self.source.mode,
            "messages": [
                {"role": m.role.name.lower(), "label": m.label, "hex": m.data.hex()} for m in self.messages
            ],
        }

    def reader(self, mode: Optional[str] = None) -> "TranscriptReader":
        """Reader over this transcript in the mode it was produced with."""
        return TranscriptReader(
            self.messages,
            self.backend,
            mode=mode or self.source.mode,
            issued=list(self.issued),
            domain=self.domain,
            field_=self.field,
        )


class TranscriptReader:
    """Sequential, validating view of a transcript for the verifier."""

    def __init__(
        self,
        messages: List[TranscriptMessage],
        backend: GroupBackend,
        mode: str = FIAT_SHAMIR,
        issued: Optional[List[int]] = None,
        domain: str = "vddp",
        field_: PrimeField = BLS_FIELD,
    ):
        if mode not in (INTERACTIVE, FIAT_SHAMIR, REPLAY):
            raise ParameterError(f"unknown reader mode: {mode}")
        self.messages = messages
        self.backend = backend
        self.mode = mode
        self.issued = issued or []
        self.field = field_
        self._pos = 0
        self._challenges_seen = 0
        self._hasher = hashlib.sha512(domain.encode())

    @classmethod
    def from_bytes(cls, data: bytes, backend: GroupBackend, mode: str = FIAT_SHAMIR, **kwargs) -> "TranscriptReader":
        return cls(Transcript.messages_from_bytes(data), backend, mode=mode, **kwargs)

    @property
    def exhausted(self) -> bool:
        return self._pos == len(self.messages)

    def _next(self, role: Role, label: str) -> bytes:
        if self._pos >= len(self.messages):
            raise MalformedMessageError(f"missing message {label}")
        msg = self.messages[self._pos]
        if msg.role != role:
            raise MalformedMessageError(f"expected {role.name.lower()} message {label}")
        self._pos += 1
        return msg.data

    def read(self, label: str) -> bytes:
        data = self._next(Role.PROVER, label)
        _absorb(self._hasher, Role.PROVER, data)
        return data

    def read_scalar(self, label: str) -> int:
        data = self.read(label)
        if len(data) != SCALAR_BYTES:
            raise MalformedMessageError(f"{label}: bad scalar length")
        value = int.from_bytes(data, "little")
        if value >= self.field.modulus:
            raise MalformedMessageError(f"{label}: scalar not canonical")
        return value

    def read_point(self, label: str) -> G1:
        data = self.read(label)
        try:
            return self.backend.decode_g1(data)
        except ParameterError as e:
            raise MalformedMessageError(f"{label}: {e}") from e

    def read_flag(self, label: str) -> int:
        data = self.read(label)
        if len(data) != 1:
            raise MalformedMessageError(f"{label}: bad flag length")
        return data[0]

    def challenge(self, label: str) -> int:
        expected = _fs_challenge(self._hasher, label, self.field) if self.mode == FIAT_SHAMIR else None
        data = self._next(Role.VERIFIER, label)
        _absorb(self._hasher, Role.VERIFIER, data)
        if len(data) != SCALAR_BYTES:
            raise MalformedMessageError(f"{label}: bad challenge length")
        value = int.from_bytes(data, "little")
        if self.mode == FIAT_SHAMIR and value != expected:
            raise MalformedMessageError(f"{label}: challenge does not match transcript hash")
        if self.mode == INTERACTIVE:
            k = self._challenges_seen
            if k >= len(self.issued) or self.issued[k] != value:
                raise MalformedMessageError(f"{label}: challenge was not issued by the verifier")
        self._challenges_seen += 1
        return value
