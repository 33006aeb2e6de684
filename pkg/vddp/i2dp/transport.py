"""Ordered duplex channels between parties and the verifier."""

import logging
import socket
import struct
import threading
from abc import ABC, abstractmethod
from collections import Counter, deque
from dataclasses import dataclass
from typing import Deque, Dict

from vddp.errors import TransportError

logger = logging.getLogger(__name__)

_HEADER = struct.Struct(">H B B I I")
_SOCKET_BUFFER = 1 << 22


@dataclass
class Message:
    session_id: str
    phase: str
    role: str  # "client" | "server" | "verifier"
    index: int
    payload: bytes

    _ROLES = ("client", "server", "verifier")

    def encode(self) -> bytes:
        sid = self.session_id.encode()
        phase = self.phase.encode()
        head = _HEADER.pack(len(sid), len(phase), self._ROLES.index(self.role), self.index, len(self.payload))
        return head + sid + phase + self.payload

    @classmethod
    def decode(cls, data: bytes) -> "Message":
        if len(data) < _HEADER.size:
            raise TransportError("truncated frame header")
        sid_len, phase_len, role, index, size = _HEADER.unpack(data[: _HEADER.size])
        body = data[_HEADER.size:]
        if len(body) != sid_len + phase_len + size or role >= len(cls._ROLES):
            raise TransportError("malformed frame")
        sid = body[:sid_len].decode()
        phase = body[sid_len: sid_len + phase_len].decode()
        return cls(sid, phase, cls._ROLES[role], index, body[sid_len + phase_len:])


class Transport(ABC):
    """Delivers messages in order and counts payload bytes per phase."""

    name = "abstract"

    def __init__(self):
        self.bytes_by_phase: Dict[str, int] = Counter()
        self.messages_by_phase: Dict[str, int] = Counter()

    @abstractmethod
    def send(self, message: Message) -> None: ...

    @abstractmethod
    def receive(self) -> Message: ...

    def close(self) -> None:
        pass

    def deliver(self, message: Message) -> Message:
        """Send one message and take it off the other end."""
        self.send(message)
        received = self.receive()
        self.bytes_by_phase[received.phase] += len(received.payload)
        self.messages_by_phase[received.phase] += 1
        return received

    @property
    def total_bytes(self) -> int:
        return sum(self.bytes_by_phase.values())

    def __enter__(self) -> "Transport":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class MemoryTransport(Transport):
    name = "memory"

    def __init__(self):
        super().__init__()
        self._queue: Deque[bytes] = deque()

    def send(self, message: Message) -> None:
        self._queue.append(message.encode())

    def receive(self) -> Message:
        if not self._queue:
            raise TransportError("receive on an empty channel")
        return Message.decode(self._queue.popleft())


class TcpTransport(Transport):
    """Length-prefixed frames over a localhost socket pair."""

    name = "tcp"

    def __init__(self, host: str = "127.0.0.1", timeout: float = 10.0):
        super().__init__()
        try:
            listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
            listener.bind((host, 0))
            listener.listen(1)
            self._out = socket.create_connection(listener.getsockname(), timeout=timeout)
            self._in, _ = listener.accept()
            listener.close()
            for sock in (self._out, self._in):
                sock.settimeout(timeout)
                sock.setsockopt(socket.SOL_SOCKET, socket.SO_SNDBUF, _SOCKET_BUFFER)
                sock.setsockopt(socket.SOL_SOCKET, socket.SO_RCVBUF, _SOCKET_BUFFER)
        except OSError as e:
            raise TransportError(f"cannot open localhost channel: {e}") from e
        logger.debug("Opened tcp transport on %s", self._in.getsockname())

    def send(self, message: Message) -> None:
        frame = message.encode()
        try:
            self._out.sendall(struct.pack(">I", len(frame)) + frame)
        except OSError as e:
            raise TransportError(f"send failed: {e}") from e

    def _read_exact(self, n: int) -> bytes:
        chunks = []
        while n:
            try:
                chunk = self._in.recv(min(n, 1 << 16))
            except OSError as e:
                raise TransportError(f"receive failed: {e}") from e
            if not chunk:
                raise TransportError("channel closed")
            chunks.append(chunk)
            n -= len(chunk)
        return b"".join(chunks)

    def deliver(self, message: Message) -> Message:
        # Frames may exceed the socket buffers, so the sender runs beside the reader
        errors = []

        def _send():
            try:
                self.send(message)
            except TransportError as e:
                errors.append(e)

        sender = threading.Thread(target=_send, daemon=True)
        sender.start()
        try:
            received = self.receive()
        finally:
            sender.join()
        if errors:
            raise errors[0]
        self.bytes_by_phase[received.phase] += len(received.payload)
        self.messages_by_phase[received.phase] += 1
        return received

    def receive(self) -> Message:
        (size,) = struct.unpack(">I", self._read_exact(4))
        return Message.decode(self._read_exact(size))

    def close(self) -> None:
        for sock in (self._out, self._in):
            try:
                sock.close()
            except OSError:
                pass


def get_transport(name: str) -> Transport:
    if name == "memory":
        return MemoryTransport()
    if name == "tcp":
        return TcpTransport()
    raise TransportError(f"unknown transport: {name}")
