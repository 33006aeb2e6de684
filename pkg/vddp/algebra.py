"""Prime-field arithmetic, evaluation domains, NTT and polynomial helpers.

Scalars are plain Python ints reduced modulo the field order. The default field is
the BLS12-381 scalar field; any odd prime can be used for small exhaustive checks.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from py_ecc.optimized_bls12_381 import curve_order

from vddp.errors import DomainSizeError, NonInvertibleError, ParameterError

logger = logging.getLogger(__name__)

BLS_MODULUS = curve_order
BLS_GENERATOR = 7

# Naive O(n^2) products above this size go through the NTT instead
_NTT_MUL_THRESHOLD = 64


def _two_adicity(n: int) -> int:
    s = 0
    while n % 2 == 0:
        n //= 2
        s += 1
    return s


def _prime_factors(n: int) -> List[int]:
    factors = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            factors.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        factors.append(n)
    return factors


def find_generator(modulus: int) -> int:
    """Smallest generator of the multiplicative group of a small prime field."""
    if modulus.bit_length() > 64:
        raise ParameterError("generator search only supported for moduli below 2^64")
    order = modulus - 1
    factors = _prime_factors(order)
    for candidate in range(2, modulus):
        if all(pow(candidate, order // q, modulus) != 1 for q in factors):
            return candidate
    raise ParameterError(f"no generator found for modulus {modulus}")


class PrimeField:
    """Arithmetic modulo an odd prime."""

    def __init__(self, modulus: int, generator: Optional[int] = None):
        if modulus < 3 or modulus % 2 == 0:
            raise ParameterError("modulus must be an odd prime")
        self.modulus = modulus
        self.two_adicity = _two_adicity(modulus - 1)
        self.generator = generator if generator is not None else find_generator(modulus)
        self._qnr: Optional[int] = None

    def __repr__(self) -> str:
        return f"PrimeField({self.modulus})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PrimeField) and other.modulus == self.modulus

    def __hash__(self) -> int:
        return hash(self.modulus)

    @property
    def byte_length(self) -> int:
        return (self.modulus.bit_length() + 7) // 8

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.modulus

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.modulus

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.modulus

    def neg(self, a: int) -> int:
        return (-a) % self.modulus

    def inv(self, a: int) -> int:
        a %= self.modulus
        if a == 0:
            raise NonInvertibleError("non-invertible")
        return pow(a, -1, self.modulus)

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            return pow(self.inv(a), -e, self.modulus)
        return pow(a % self.modulus, e, self.modulus)

    def div(self, a: int, b: int) -> int:
        return (a * self.inv(b)) % self.modulus

    def batch_inv(self, values: Sequence[int]) -> List[int]:
        """Montgomery batch inversion; every value must be non-zero."""
        p = self.modulus
        prefix = []
        acc = 1
        for v in values:
            if v % p == 0:
                raise NonInvertibleError("non-invertible")
            prefix.append(acc)
            acc = acc * v % p
        acc_inv = pow(acc, -1, p)
        out = [0] * len(values)
        for i in range(len(values) - 1, -1, -1):
            out[i] = acc_inv * prefix[i] % p
            acc_inv = acc_inv * values[i] % p
        return out

    def is_square(self, a: int) -> bool:
        """Euler criterion, with 0 counted as a square."""
        a %= self.modulus
        return a == 0 or pow(a, (self.modulus - 1) // 2, self.modulus) == 1

    @property
    def qnr(self) -> int:
        """Smallest quadratic non-residue."""
        if self._qnr is None:
            z = 2
            while self.is_square(z):
                z += 1
            self._qnr = z
        return self._qnr

    def sqrt(self, a: int) -> Optional[int]:
        """Tonelli-Shanks square root, or None for non-squares."""
        p = self.modulus
        a %= p
        if a == 0:
            return 0
        if pow(a, (p - 1) // 2, p) != 1:
            return None
        if p % 4 == 3:
            return pow(a, (p + 1) // 4, p)
        q, s = p - 1, 0
        while q % 2 == 0:
            q //= 2
            s += 1
        m = s
        c = pow(self.qnr, q, p)
        t = pow(a, q, p)
        r = pow(a, (q + 1) // 2, p)
        while t != 1:
            i, t2 = 0, t
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = pow(c, 1 << (m - i - 1), p)
            m = i
            c = b * b % p
            t = t * c % p
            r = r * b % p
        return r

    def sqrt_witness(self, a: int) -> Tuple[int, Optional[int]]:
        """Return (is_square, root) where root ** 2 == a when is_square is 1."""
        root = self.sqrt(a)
        if root is None:
            return 0, None
        return 1, root

    def root_of_unity(self, n: int) -> int:
        """Generator of the order-n multiplicative subgroup."""
        if n < 1 or (self.modulus - 1) % n != 0:
            raise DomainSizeError(f"unsupported domain size: {n} does not divide p-1")
        return pow(self.generator, (self.modulus - 1) // n, self.modulus)

    def encode_signed(self, v: int) -> int:
        """Embed a signed integer as a residue (negatives map to p - |v|)."""
        return v % self.modulus

    def decode_signed(self, a: int) -> int:
        """Residues above p/2 decode to negative integers."""
        a %= self.modulus
        return a - self.modulus if a > self.modulus // 2 else a

    def to_bytes(self, a: int) -> bytes:
        """Canonical little-endian scalar encoding."""
        return (a % self.modulus).to_bytes(max(32, self.byte_length), "little")

    def from_bytes(self, data: bytes) -> int:
        value = int.from_bytes(data, "little")
        if value >= self.modulus:
            raise ParameterError("scalar encoding is not canonical")
        return value


BLS_FIELD = PrimeField(BLS_MODULUS, BLS_GENERATOR)


def field_arith(a: int, b: Optional[int], op: str, field: PrimeField = BLS_FIELD) -> int:
    """Dispatch one of add, sub, mul, inv, pow, neg on scalars of `field`."""
    if op == "add":
        return field.add(a, b)
    if op == "sub":
        return field.sub(a, b)
    if op == "mul":
        return field.mul(a, b)
    if op == "inv":
        return field.inv(a)
    if op == "pow":
        return field.pow(a, b)
    if op == "neg":
        return field.neg(a)
    raise ParameterError(f"unknown field operation: {op}")


def sqrt_witness(a: int, field: PrimeField = BLS_FIELD) -> Tuple[int, Optional[int]]:
    return field.sqrt_witness(a)


@dataclass(frozen=True)
class EvalDomain:
    """Multiplicative subgroup {omega^0, ..., omega^(size-1)}."""

    size: int
    omega: int
    field: PrimeField = BLS_FIELD

    @property
    def is_power_of_two(self) -> bool:
        return self.size & (self.size - 1) == 0

    @property
    def log_size(self) -> int:
        return self.size.bit_length() - 1

    def element(self, i: int) -> int:
        return pow(self.omega, i % self.size, self.field.modulus)

    @property
    def elements(self) -> List[int]:
        return _domain_elements(self.size, self.omega, self.field.modulus)

    def contains(self, x: int) -> bool:
        return pow(x, self.size, self.field.modulus) == 1

    def vanishing_eval(self, x: int) -> int:
        """Z(x) = x^size - 1."""
        return (pow(x, self.size, self.field.modulus) - 1) % self.field.modulus

    def index_of(self) -> Dict[int, int]:
        return {w: i for i, w in enumerate(self.elements)}


@lru_cache(maxsize=64)
def _domain_elements(size: int, omega: int, p: int) -> List[int]:
    out = [1] * size
    for i in range(1, size):
        out[i] = out[i - 1] * omega % p
    return out


def domain_generate(m: int, field: PrimeField = BLS_FIELD) -> EvalDomain:
    """Evaluation domain of size 2^m."""
    if m < 0 or m > field.two_adicity:
        raise DomainSizeError(f"unsupported domain size: 2^{m} exceeds 2-adicity {field.two_adicity}")
    omega = pow(field.generator, (field.modulus - 1) >> m, field.modulus)
    return EvalDomain(1 << m, omega, field)


def subgroup_domain(n: int, field: PrimeField) -> EvalDomain:
    """Order-n subgroup for any n dividing p - 1 (toy fields)."""
    return EvalDomain(n, field.root_of_unity(n), field)


def next_power_of_two(n: int) -> int:
    size = 1
    while size < n:
        size <<= 1
    return size


def _fft(values: Sequence[int], omega: int, p: int) -> List[int]:
    """In-order evaluation of the coefficient list at omega^0..omega^(n-1)."""
    n = len(values)
    out = [v % p for v in values]
    j = 0
    for i in range(1, n):
        bit = n >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j |= bit
        if i < j:
            out[i], out[j] = out[j], out[i]
    length = 2
    while length <= n:
        w_len = pow(omega, n // length, p)
        half = length // 2
        twiddles = [1] * half
        for k in range(1, half):
            twiddles[k] = twiddles[k - 1] * w_len % p
        for start in range(0, n, length):
            for k in range(half):
                u = out[start + k]
                v = out[start + k + half] * twiddles[k] % p
                out[start + k] = (u + v) % p
                out[start + k + half] = (u - v) % p
        length <<= 1
    return out


def _dft(values: Sequence[int], omega: int, p: int) -> List[int]:
    n = len(values)
    powers = _domain_elements(n, omega, p)
    return [sum(values[j] * powers[(i * j) % n] for j in range(n)) % p for i in range(n)]


def ntt(evals: Sequence[int], domain: EvalDomain) -> List[int]:
    """Interpolate: values at omega^i -> coefficients (low degree first).

    poly_eval(ntt(v, D), D.element(i)) == v[i] for every i.
    """
    if len(evals) != domain.size:
        raise ParameterError(f"length {len(evals)} does not match domain size {domain.size}")
    p = domain.field.modulus
    omega_inv = pow(domain.omega, -1, p)
    transform = _fft if domain.is_power_of_two else _dft
    out = transform(evals, omega_inv, p)
    n_inv = pow(domain.size, -1, p)
    return [c * n_inv % p for c in out]


def intt(coeffs: Sequence[int], domain: EvalDomain) -> List[int]:
    """Evaluate coefficients on the domain; inverse of ntt."""
    if len(coeffs) > domain.size:
        raise ParameterError(f"length {len(coeffs)} exceeds domain size {domain.size}")
    padded = list(coeffs) + [0] * (domain.size - len(coeffs))
    transform = _fft if domain.is_power_of_two else _dft
    return transform(padded, domain.omega, domain.field.modulus)


def poly_eval(coeffs: Sequence[int], x: int, field: PrimeField = BLS_FIELD) -> int:
    """Horner evaluation of sum coeffs[j] * x^j."""
    p = field.modulus
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


def poly_trim(coeffs: Sequence[int]) -> List[int]:
    out = list(coeffs)
    while out and out[-1] == 0:
        out.pop()
    return out


def poly_add(a: Sequence[int], b: Sequence[int], field: PrimeField = BLS_FIELD) -> List[int]:
    p = field.modulus
    n = max(len(a), len(b))
    return [((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)) % p for i in range(n)]


def poly_sub(a: Sequence[int], b: Sequence[int], field: PrimeField = BLS_FIELD) -> List[int]:
    p = field.modulus
    n = max(len(a), len(b))
    return [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]


def poly_scale(a: Sequence[int], c: int, field: PrimeField = BLS_FIELD) -> List[int]:
    p = field.modulus
    return [x * c % p for x in a]


def poly_mul(a: Sequence[int], b: Sequence[int], field: PrimeField = BLS_FIELD) -> List[int]:
    if not a or not b:
        return []
    p = field.modulus
    out_len = len(a) + len(b) - 1
    if min(len(a), len(b)) > _NTT_MUL_THRESHOLD and out_len <= (1 << field.two_adicity):
        size = next_power_of_two(out_len)
        domain = domain_generate(size.bit_length() - 1, field)
        ea = intt(a, domain)
        eb = intt(b, domain)
        return ntt([x * y % p for x, y in zip(ea, eb)], domain)[:out_len]
    out = [0] * out_len
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return [v % p for v in out]


def poly_scale_input(a: Sequence[int], c: int, field: PrimeField = BLS_FIELD) -> List[int]:
    """Coefficients of P(c * X)."""
    p = field.modulus
    out = []
    power = 1
    for x in a:
        out.append(x * power % p)
        power = power * c % p
    return out


def poly_div_linear(coeffs: Sequence[int], x: int, field: PrimeField = BLS_FIELD) -> Tuple[List[int], int]:
    """Synthetic division by (X - x); returns (quotient, remainder == P(x))."""
    p = field.modulus
    if not coeffs:
        return [], 0
    n = len(coeffs)
    quotient = [0] * (n - 1)
    acc = 0
    for i in range(n - 1, 0, -1):
        acc = (acc * x + coeffs[i]) % p
        quotient[i - 1] = acc
    remainder = (acc * x + coeffs[0]) % p
    return quotient, remainder


def poly_divmod_vanishing(coeffs: Sequence[int], n: int, field: PrimeField = BLS_FIELD) -> Tuple[List[int], List[int]]:
    """Divide by X^n - 1; returns (quotient, remainder of length n)."""
    p = field.modulus
    work = [c % p for c in coeffs]
    if len(work) <= n:
        return [], work + [0] * (n - len(work))
    quotient = [0] * (len(work) - n)
    for i in range(len(work) - 1, n - 1, -1):
        q = work[i]
        if q:
            quotient[i - n] = q
            work[i] = 0
            work[i - n] = (work[i - n] + q) % p
    return quotient, work[:n]


def vanishing_poly(n: int, field: PrimeField = BLS_FIELD) -> List[int]:
    """Coefficients of X^n - 1."""
    out = [0] * (n + 1)
    out[0] = field.modulus - 1
    out[n] = 1
    return out


def lagrange_eval(evals: Sequence[int], domain: EvalDomain, x: int) -> int:
    """Evaluate the interpolant of `evals` at x (barycentric form)."""
    field = domain.field
    p = field.modulus
    n = domain.size
    if len(evals) != n:
        raise ParameterError(f"length {len(evals)} does not match domain size {n}")
    points = domain.elements
    x %= p
    z = (pow(x, n, p) - 1) % p
    if z == 0:
        return evals[points.index(x)] % p
    inverses = field.batch_inv([(x - w) % p for w in points])
    acc = 0
    for v, w, inv in zip(evals, points, inverses):
        if v:
            acc += v * w % p * inv
    return acc % p * z % p * pow(n, -1, p) % p
