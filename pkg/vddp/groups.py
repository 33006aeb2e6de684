"""Pairing-group backends.

``Bls12381Backend`` wraps ``py_ecc.optimized_bls12_381``. ``ExponentBackend`` stores
every group element as its discrete log modulo the group order: it is algebraically
exact but offers no security, and exists so statistical suites run in seconds.
Both count the group operations they perform.
"""

import logging
from abc import ABC, abstractmethod
from collections import Counter
from typing import Any, Dict, Iterable, List, Sequence, Tuple

from py_ecc import optimized_bls12_381 as bls
from py_ecc.bls.point_compression import compress_G1, compress_G2, decompress_G1, decompress_G2

from vddp.algebra import BLS_MODULUS
from vddp.errors import ParameterError

logger = logging.getLogger(__name__)

# Points are backend-specific opaque values
G1 = Any
G2 = Any

G1_BYTES = 48
G2_BYTES = 96


class GroupBackend(ABC):
    """Operations on G1, G2 and the pairing used by the commitment layer."""

    name: str = ""
    order: int = BLS_MODULUS

    def __init__(self):
        self.counters: Counter = Counter()

    def reset_counters(self) -> None:
        self.counters.clear()

    def snapshot(self) -> Dict[str, int]:
        return dict(self.counters)

    @property
    @abstractmethod
    def g1(self) -> G1: ...

    @property
    @abstractmethod
    def g2(self) -> G2: ...

    @property
    @abstractmethod
    def zero1(self) -> G1: ...

    @abstractmethod
    def add(self, a: G1, b: G1) -> G1: ...

    @abstractmethod
    def mul(self, a: G1, k: int) -> G1: ...

    @abstractmethod
    def neg(self, a: G1) -> G1: ...

    @abstractmethod
    def eq(self, a: G1, b: G1) -> bool: ...

    @abstractmethod
    def add2(self, a: G2, b: G2) -> G2: ...

    @abstractmethod
    def mul2(self, a: G2, k: int) -> G2: ...

    @abstractmethod
    def pairing_check(self, pairs: Sequence[Tuple[G1, G2]]) -> bool:
        """True iff the product of e(P_i, Q_i) is the identity of GT."""

    @abstractmethod
    def encode_g1(self, a: G1) -> bytes: ...

    @abstractmethod
    def decode_g1(self, data: bytes) -> G1: ...

    @abstractmethod
    def encode_g2(self, a: G2) -> bytes: ...

    @abstractmethod
    def decode_g2(self, data: bytes) -> G2: ...

    def sub(self, a: G1, b: G1) -> G1:
        return self.add(a, self.neg(b))

    def is_zero(self, a: G1) -> bool:
        return self.eq(a, self.zero1)

    def msm(self, points: Sequence[G1], scalars: Sequence[int]) -> G1:
        """Multi-scalar multiplication, skipping zero scalars."""
        acc = self.zero1
        for point, k in zip(points, scalars):
            k %= self.order
            if k:
                acc = self.add(acc, self.mul(point, k))
        return acc

    def sum(self, points: Iterable[G1]) -> G1:
        acc = self.zero1
        for point in points:
            acc = self.add(acc, point)
        return acc


class Bls12381Backend(GroupBackend):
    name = "bls12_381"

    @property
    def g1(self) -> G1:
        return bls.G1

    @property
    def g2(self) -> G2:
        return bls.G2

    @property
    def zero1(self) -> G1:
        return bls.Z1

    def add(self, a: G1, b: G1) -> G1:
        self.counters["g1_add"] += 1
        return bls.add(a, b)

    def mul(self, a: G1, k: int) -> G1:
        self.counters["g1_mul"] += 1
        return bls.multiply(a, k % self.order)

    def neg(self, a: G1) -> G1:
        return bls.neg(a)

    def eq(self, a: G1, b: G1) -> bool:
        return bls.eq(a, b)

    def add2(self, a: G2, b: G2) -> G2:
        self.counters["g2_add"] += 1
        return bls.add(a, b)

    def mul2(self, a: G2, k: int) -> G2:
        self.counters["g2_mul"] += 1
        return bls.multiply(a, k % self.order)

    def pairing_check(self, pairs: Sequence[Tuple[G1, G2]]) -> bool:
        acc = bls.FQ12.one()
        for p1, q2 in pairs:
            if bls.is_inf(p1) or bls.is_inf(q2):
                continue
            self.counters["pairing"] += 1
            acc = acc * bls.pairing(q2, p1, final_exponentiate=False)
        return bls.final_exponentiate(acc) == bls.FQ12.one()

    def encode_g1(self, a: G1) -> bytes:
        return compress_G1(a).to_bytes(G1_BYTES, "big")

    def decode_g1(self, data: bytes) -> G1:
        if len(data) != G1_BYTES:
            raise ParameterError("bad G1 encoding length")
        try:
            return decompress_G1(int.from_bytes(data, "big"))
        except ValueError as e:
            raise ParameterError(f"bad G1 encoding: {e}") from e

    def encode_g2(self, a: G2) -> bytes:
        z1, z2 = compress_G2(a)
        return z1.to_bytes(G1_BYTES, "big") + z2.to_bytes(G1_BYTES, "big")

    def decode_g2(self, data: bytes) -> G2:
        if len(data) != G2_BYTES:
            raise ParameterError("bad G2 encoding length")
        try:
            return decompress_G2((int.from_bytes(data[:G1_BYTES], "big"), int.from_bytes(data[G1_BYTES:], "big")))
        except ValueError as e:
            raise ParameterError(f"bad G2 encoding: {e}") from e


class ExponentBackend(GroupBackend):
    """Insecure stand-in: element g^a is the integer a mod order; e(g^a, g2^b) is a*b."""

    name = "exponent"

    @property
    def g1(self) -> G1:
        return 1

    @property
    def g2(self) -> G2:
        return 1

    @property
    def zero1(self) -> G1:
        return 0

    def add(self, a: G1, b: G1) -> G1:
        self.counters["g1_add"] += 1
        return (a + b) % self.order

    def mul(self, a: G1, k: int) -> G1:
        self.counters["g1_mul"] += 1
        return a * k % self.order

    def neg(self, a: G1) -> G1:
        return (-a) % self.order

    def eq(self, a: G1, b: G1) -> bool:
        return (a - b) % self.order == 0

    def add2(self, a: G2, b: G2) -> G2:
        self.counters["g2_add"] += 1
        return (a + b) % self.order

    def mul2(self, a: G2, k: int) -> G2:
        self.counters["g2_mul"] += 1
        return a * k % self.order

    def pairing_check(self, pairs: Sequence[Tuple[G1, G2]]) -> bool:
        self.counters["pairing"] += len(pairs)
        return sum(a * b for a, b in pairs) % self.order == 0

    def encode_g1(self, a: G1) -> bytes:
        return (a % self.order).to_bytes(G1_BYTES, "big")

    def decode_g1(self, data: bytes) -> G1:
        if len(data) != G1_BYTES:
            raise ParameterError("bad G1 encoding length")
        value = int.from_bytes(data, "big")
        if value >= self.order:
            raise ParameterError("bad G1 encoding: not reduced")
        return value

    def encode_g2(self, a: G2) -> bytes:
        return (a % self.order).to_bytes(G2_BYTES, "big")

    def decode_g2(self, data: bytes) -> G2:
        if len(data) != G2_BYTES:
            raise ParameterError("bad G2 encoding length")
        return int.from_bytes(data, "big") % self.order


_BACKENDS: Dict[str, GroupBackend] = {}
_BACKEND_TYPES = {
    Bls12381Backend.name: Bls12381Backend,
    ExponentBackend.name: ExponentBackend,
}


def get_backend(name: str = None) -> GroupBackend:
    """Shared backend instance by name; defaults to the configured backend."""
    if name is None:
        from vddp.config import get_backend_name

        name = get_backend_name()
    if name not in _BACKEND_TYPES:
        raise ParameterError(f"unknown group backend: {name}")
    if name not in _BACKENDS:
        logger.debug("Initialising group backend %s", name)
        _BACKENDS[name] = _BACKEND_TYPES[name]()
    return _BACKENDS[name]


def available_backends() -> List[str]:
    return sorted(_BACKEND_TYPES)
