"""Seeded or OS-entropy randomness for provers, verifiers and simulators."""

import hashlib
import random
import secrets
from typing import List, Optional

from vddp.algebra import BLS_FIELD, PrimeField


class Rng:
    """Source of field elements and bits.

    With a seed the stream is reproducible (test mode); without one every draw comes
    from the OS through ``secrets``.
    """

    def __init__(self, seed: Optional[int] = None, field: PrimeField = BLS_FIELD):
        self.seed = seed
        self.field = field
        self._random = random.Random(seed) if seed is not None else None

    @property
    def deterministic(self) -> bool:
        return self._random is not None

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randbelow bound must be positive")
        if self._random is None:
            return secrets.randbelow(n)
        return self._random.randrange(n)

    def scalar(self) -> int:
        return self.randbelow(self.field.modulus)

    def nonzero_scalar(self) -> int:
        return 1 + self.randbelow(self.field.modulus - 1)

    def scalars(self, n: int) -> List[int]:
        return [self.scalar() for _ in range(n)]

    def bit(self) -> int:
        return self.randbelow(2)

    def bits(self, n: int) -> List[int]:
        if self._random is None:
            value = secrets.randbits(n) if n else 0
        else:
            value = self._random.getrandbits(n) if n else 0
        return [(value >> i) & 1 for i in range(n)]

    def index(self, n: int) -> int:
        return self.randbelow(n)

    def child(self, label: str) -> "Rng":
        """Independent stream for a named party or purpose.

        Seeded parents derive the child seed from a hash, so sibling streams never
        depend on how many draws the parent made.
        """
        if self.seed is None:
            return Rng(None, self.field)
        digest = hashlib.sha256(f"{self.seed}/{label}".encode()).digest()
        return Rng(int.from_bytes(digest[:16], "big"), self.field)
