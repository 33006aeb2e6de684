"""Verifiable randomness: Legendre PRF bits, Bernoulli and discrete Laplace circuits.

All probabilities are exact ``Fraction``s once rounded to their ν-bit realizations;
only the target probabilities are computed in high-precision floating point.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from vddp.algebra import BLS_FIELD, PrimeField
from vddp.errors import ParameterError, PrecisionCollapseError
from vddp.rng import Rng

logger = logging.getLogger(__name__)

# Exhaustive pmf enumeration bound on the magnitude bits
MAX_PMF_GAMMA = 24


@dataclass
class LprfOutput:
    """Legendre PRF bits with square-root witnesses.

    For every k: witnesses[k]^2 == ((1 - bits[k]) * qnr + bits[k]) * (start + k + seed).
    """

    seed: int
    bits: List[int]
    witnesses: List[int]
    qnr: int
    start: int = 0

    def __len__(self) -> int:
        return len(self.bits)


def lprf_eval(s: int, d: int, field_: PrimeField = BLS_FIELD, start: int = 0) -> LprfOutput:
    """Bits L_s(k) for k = start..start+d-1: 1 iff k + s is a square (0 included)."""
    if d < 1:
        raise ParameterError("LPRF output length must be at least 1")
    p = field_.modulus
    qnr = field_.qnr
    bits, witnesses = [], []
    for k in range(start, start + d):
        a = (k + s) % p
        root = field_.sqrt(a)
        if root is not None:
            bits.append(1)
            witnesses.append(root)
        else:
            bits.append(0)
            witnesses.append(field_.sqrt(qnr * a % p))
    return LprfOutput(seed=s % p, bits=bits, witnesses=witnesses, qnr=qnr, start=start)


def lprf_check(out: LprfOutput, field_: PrimeField = BLS_FIELD) -> bool:
    """Witness relation for every index."""
    p = field_.modulus
    for i, (b, w) in enumerate(zip(out.bits, out.witnesses)):
        if b * (1 - b) != 0:
            return False
        if w * w % p != ((1 - b) * out.qnr + b) * (out.start + i + out.seed) % p:
            return False
    return True


@dataclass(frozen=True)
class BernoulliParams:
    """Bernoulli(realized_p) circuit parameters.

    ``beta[i]`` is the i-th fractional bit of realized_p (beta[0] most significant) and
    beta[nu - 1] == 1.
    """

    p_star: Fraction
    nu: int
    beta: Tuple[int, ...]
    realized_p: Fraction

    @classmethod
    def from_probability(cls, p_star: Union[Fraction, float, str], nu: int) -> "BernoulliParams":
        """Round p* to q / 2^nu with q = floor(p* 2^nu + 1/2), then drop trailing zeros."""
        if nu < 1:
            raise ParameterError("nu must be at least 1")
        p_star = Fraction(p_star)
        q = int(p_star * (1 << nu) + Fraction(1, 2))
        if q <= 0 or q >= (1 << nu):
            raise PrecisionCollapseError(
                f"precision collapse: p*={float(p_star):.3e} rounds to {q}/2^{nu}; increase nu or shrink gamma"
            )
        while q % 2 == 0:
            q //= 2
            nu -= 1
        beta = tuple((q >> (nu - 1 - i)) & 1 for i in range(nu))
        return cls(p_star=p_star, nu=nu, beta=beta, realized_p=Fraction(q, 1 << nu))

    @classmethod
    def from_beta(cls, beta: Union[str, Sequence[int]], p_star: Optional[Fraction] = None) -> "BernoulliParams":
        """Build from bits; strings are written beta[nu-1] first (``"01"`` normalizes to ``"1"``)."""
        bits = [int(c) for c in reversed(beta)] if isinstance(beta, str) else [int(b) for b in beta]
        if any(b not in (0, 1) for b in bits):
            raise ParameterError("beta must be a bit string")
        while bits and bits[-1] == 0:
            bits.pop()
        if not bits:
            raise PrecisionCollapseError("precision collapse: beta encodes probability 0")
        nu = len(bits)
        q = sum(b << (nu - 1 - i) for i, b in enumerate(bits))
        realized = Fraction(q, 1 << nu)
        return cls(p_star=realized if p_star is None else Fraction(p_star), nu=nu, beta=tuple(bits), realized_p=realized)

    @property
    def beta_string(self) -> str:
        return "".join(str(b) for b in reversed(self.beta))

    @property
    def numerator(self) -> int:
        return self.realized_p.numerator

    def to_config(self) -> Dict[str, object]:
        return {"p_star": str(self.p_star), "nu": self.nu, "beta": self.beta_string}

    @classmethod
    def from_config(cls, data: Dict[str, object]) -> "BernoulliParams":
        p_star = data.get("p_star")
        params = cls.from_beta(str(data["beta"]), Fraction(str(p_star)) if p_star is not None else None)
        if "nu" in data and int(data["nu"]) != params.nu:
            raise ParameterError("nu does not match the beta string")
        return params


@dataclass(frozen=True)
class LaplaceParams:
    """Discrete Laplace sampling circuit: zeroing coin, sign bit, gamma magnitude coins."""

    t_scale: Fraction
    gamma: int
    zero_params: BernoulliParams
    mag_params: Tuple[BernoulliParams, ...]
    requested_gamma: Optional[int] = None

    @property
    def n_lap(self) -> int:
        return self.zero_params.nu + 1 + sum(b.nu for b in self.mag_params)

    @property
    def min_nu(self) -> int:
        return min([self.zero_params.nu] + [b.nu for b in self.mag_params])

    @property
    def support_bound(self) -> int:
        return 1 << self.gamma

    def block_sizes(self) -> List[int]:
        """Bit counts in circuit order: zeroing coin, sign, then magnitude levels."""
        return [self.zero_params.nu, 1] + [b.nu for b in self.mag_params]

    def to_config(self) -> Dict[str, object]:
        return {
            "t_scale": str(self.t_scale),
            "gamma": self.gamma,
            "zero": self.zero_params.to_config(),
            "mag": [b.to_config() for b in self.mag_params],
            "n_lap": self.n_lap,
        }

    @classmethod
    def from_config(cls, data: Dict[str, object]) -> "LaplaceParams":
        mag = tuple(BernoulliParams.from_config(m) for m in data["mag"])
        if int(data["gamma"]) != len(mag):
            raise ParameterError("gamma does not match the number of magnitude levels")
        return cls(
            t_scale=Fraction(str(data["t_scale"])),
            gamma=len(mag),
            zero_params=BernoulliParams.from_config(data["zero"]),
            mag_params=mag,
        )


def _mpf_to_fraction(x: "mpmath.mpf") -> Fraction:
    man, exp = x.man_exp
    if exp >= 0:
        return Fraction(int(man) << exp)
    return Fraction(int(man), 1 << -exp)


def target_probabilities(t_scale: Union[Fraction, float, str, int], gamma: int, prec_bits: int) -> Tuple[Fraction, List[Fraction]]:
    """p_z* = (e^{1/t} - 1)/(e^{1/t} + 1) and p_i* = 1/(1 + e^{2^i/t}) at prec_bits precision."""
    t = Fraction(t_scale)
    if t <= 0:
        raise ParameterError("t_scale must be positive")
    with mpmath.workprec(prec_bits):
        inv_t = mpmath.mpf(t.denominator) / t.numerator
        e = mpmath.exp(inv_t)
        p_z = _mpf_to_fraction((e - 1) / (e + 1))
        mags = [_mpf_to_fraction(1 / (1 + mpmath.exp(inv_t * (1 << i)))) for i in range(gamma)]
    return p_z, mags


def derive_bernoulli(
    t_scale: Union[Fraction, float, str, int],
    gamma: int,
    nus: Union[int, Sequence[int]],
    allow_truncation: bool = False,
) -> LaplaceParams:
    """
    Bernoulli parameters of the Laplace circuit for scale t.

    Args:
        t_scale: Laplace scale t (Δ/ε)
        gamma: Number of magnitude levels; support is [-2^gamma, 2^gamma]
        nus: One precision for every coin, or [nu_z, nu_0, ..., nu_{gamma-1}]
        allow_truncation: Drop trailing magnitude levels whose probability rounds to 0

    Returns:
        LaplaceParams with realized probabilities
    """
    if gamma < 0:
        raise ParameterError("gamma must be non-negative")
    if isinstance(nus, int):
        nu_list = [nus] * (gamma + 1)
    else:
        nu_list = list(nus)
        if len(nu_list) != gamma + 1:
            raise ParameterError(f"expected {gamma + 1} precisions, got {len(nu_list)}")
    prec = 2 * max(nu_list) + 64
    p_z, mags = target_probabilities(t_scale, gamma, prec)
    zero = BernoulliParams.from_probability(p_z, nu_list[0])
    mag_params: List[BernoulliParams] = []
    for i, (p_i, nu_i) in enumerate(zip(mags, nu_list[1:])):
        try:
            mag_params.append(BernoulliParams.from_probability(p_i, nu_i))
        except PrecisionCollapseError:
            if not allow_truncation:
                raise
            # p_i* decreases in i, so every later level collapses as well
            logger.warning("Truncating magnitude levels %d..%d: probability below 2^-%d", i, gamma - 1, nu_i)
            break
    logger.debug("Derived Bernoulli parameters for t=%s gamma=%d", t_scale, len(mag_params))
    return LaplaceParams(
        t_scale=Fraction(t_scale),
        gamma=len(mag_params),
        zero_params=zero,
        mag_params=tuple(mag_params),
        requested_gamma=gamma,
    )


def c_ber(bits: Sequence[int], params: BernoulliParams) -> Tuple[int, List[int]]:
    """Fold r <- bits[nu-1]; r <- r OR bits[i] if beta[i] else r AND bits[i]; trace[i] = r after bit i."""
    nu = params.nu
    if len(bits) != nu:
        raise ParameterError(f"expected {nu} bits, got {len(bits)}")
    trace = [0] * nu
    r = bits[nu - 1]
    trace[nu - 1] = r
    for i in range(nu - 2, -1, -1):
        b = bits[i]
        r = (r | b) if params.beta[i] else (r & b)
        trace[i] = r
    return trace[0], trace


@dataclass
class LapTrace:
    """Every intermediate value of one Laplace circuit evaluation."""

    bz_trace: List[int]
    b_z: int
    s_bit: int
    mag_traces: List[List[int]]
    mag_bits: List[int]
    magnitude: int
    noise: int

    @property
    def sign(self) -> int:
        return 2 * self.s_bit - 1


def c_lap(bz_bits: Sequence[int], s_bit: int, mag_bits: Sequence[Sequence[int]], params: LaplaceParams) -> Tuple[int, LapTrace]:
    """noise = (1 - b_z) * (2 s - 1) * (1 + sum 2^i r_i)."""
    if len(mag_bits) != params.gamma:
        raise ParameterError(f"expected {params.gamma} magnitude blocks, got {len(mag_bits)}")
    if s_bit not in (0, 1):
        raise ParameterError("sign input must be a bit")
    b_z, bz_trace = c_ber(bz_bits, params.zero_params)
    traces, coins = [], []
    for block, mp in zip(mag_bits, params.mag_params):
        coin, trace = c_ber(block, mp)
        coins.append(coin)
        traces.append(trace)
    magnitude = 1 + sum(c << i for i, c in enumerate(coins))
    noise = (1 - b_z) * (2 * s_bit - 1) * magnitude
    return noise, LapTrace(bz_trace, b_z, s_bit, traces, coins, magnitude, noise)


def split_lap_bits(bits: Sequence[int], params: LaplaceParams) -> Tuple[List[int], int, List[List[int]]]:
    """Cut an n_lap-bit slice into (zeroing block, sign bit, magnitude blocks)."""
    if len(bits) != params.n_lap:
        raise ParameterError(f"expected {params.n_lap} bits, got {len(bits)}")
    sizes = params.block_sizes()
    blocks, offset = [], 0
    for size in sizes:
        blocks.append(list(bits[offset: offset + size]))
        offset += size
    return blocks[0], blocks[1][0], blocks[2:]


def c_lap_from_bits(bits: Sequence[int], params: LaplaceParams) -> Tuple[int, LapTrace]:
    bz, s, mags = split_lap_bits(bits, params)
    return c_lap(bz, s, mags, params)


def sample_noise(params: LaplaceParams, rng: Rng, n: int = 1) -> List[int]:
    """Run the circuit on uniformly random bits."""
    return [c_lap_from_bits(rng.bits(params.n_lap), params)[0] for _ in range(n)]


@dataclass
class NoisePmf:
    """Exact pmf stored as integer weights over one common denominator."""

    weights: Dict[int, int]
    denominator: int

    def __getitem__(self, r: int) -> Fraction:
        return Fraction(self.weights.get(r, 0), self.denominator)

    prob = __getitem__

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.weights))

    def __len__(self) -> int:
        return len(self.weights)

    def items(self) -> Iterator[Tuple[int, Fraction]]:
        for r in sorted(self.weights):
            yield r, self[r]

    @property
    def support(self) -> List[int]:
        return sorted(r for r, w in self.weights.items() if w)

    def total(self) -> Fraction:
        return Fraction(sum(self.weights.values()), self.denominator)

    def expected_abs(self) -> Fraction:
        return Fraction(sum(abs(r) * w for r, w in self.weights.items()), self.denominator)

    def mean(self) -> Fraction:
        return Fraction(sum(r * w for r, w in self.weights.items()), self.denominator)

    def variance(self) -> Fraction:
        second = Fraction(sum(r * r * w for r, w in self.weights.items()), self.denominator)
        return second - self.mean() ** 2

    def abs_variance(self) -> Fraction:
        second = Fraction(sum(r * r * w for r, w in self.weights.items()), self.denominator)
        return second - self.expected_abs() ** 2

    def shifted(self, delta: int) -> "NoisePmf":
        """Distribution of r + delta."""
        return NoisePmf({r + delta: w for r, w in self.weights.items()}, self.denominator)

    def as_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        values = np.array(self.support, dtype=np.int64)
        probs = np.array([self.weights[r] / self.denominator for r in self.support], dtype=np.float64)
        return values, probs


def point_mass(params: LaplaceParams, r: int) -> Fraction:
    """Pr[noise = r] without enumerating the whole support."""
    p_z = params.zero_params.realized_p
    if r == 0:
        return p_z
    m = abs(r) - 1
    if m >= (1 << params.gamma):
        return Fraction(0)
    prob = (1 - p_z) / 2
    for i, mp in enumerate(params.mag_params):
        prob *= mp.realized_p if (m >> i) & 1 else 1 - mp.realized_p
    return prob


def noise_pmf(params: LaplaceParams) -> NoisePmf:
    """Exact output distribution of the Laplace circuit on uniform bits."""
    if params.gamma > MAX_PMF_GAMMA:
        raise ParameterError(f"gamma {params.gamma} exceeds enumeration bound {MAX_PMF_GAMMA}")
    # Distribution of m = sum 2^i r_i as integer weights over 2^{sum nu_i}
    dist = [1]
    for i, mp in enumerate(params.mag_params):
        one = mp.numerator
        zero = (1 << mp.nu) - one
        dist = [w * zero for w in dist] + [w * one for w in dist]
    nu_z = params.zero_params.nu
    q_z = params.zero_params.numerator
    mag_total = sum(b.nu for b in params.mag_params)
    denominator = 1 << (nu_z + 1 + mag_total)
    side = (1 << nu_z) - q_z
    weights: Dict[int, int] = {0: q_z << (1 + mag_total)}
    for m, w in enumerate(dist):
        if w:
            weights[m + 1] = side * w
            weights[-(m + 1)] = side * w
    return NoisePmf(weights, denominator)


def convolve(pmfs: Sequence[NoisePmf]) -> NoisePmf:
    """Distribution of the sum of independent noises."""
    if not pmfs:
        return NoisePmf({0: 1}, 1)
    acc = pmfs[0]
    for other in pmfs[1:]:
        weights: Dict[int, int] = {}
        for r1, w1 in acc.weights.items():
            for r2, w2 in other.weights.items():
                weights[r1 + r2] = weights.get(r1 + r2, 0) + w1 * w2
        acc = NoisePmf(weights, acc.denominator * other.denominator)
    return acc


def ideal_laplace_pmf(t_scale: Union[Fraction, float, int], gamma: int, prec_bits: int = 128) -> Dict[int, "mpmath.mpf"]:
    """Lap_Z(t) truncated to [-2^gamma, 2^gamma] and renormalized."""
    t = Fraction(t_scale)
    bound = 1 << gamma
    with mpmath.workprec(prec_bits):
        inv_t = mpmath.mpf(t.denominator) / t.numerator
        e = mpmath.exp(inv_t)
        norm = (e - 1) / (e + 1)
        raw = {r: norm * mpmath.exp(-abs(r) * inv_t) for r in range(-bound, bound + 1)}
        total = mpmath.fsum(raw.values())
        return {r: v / total for r, v in raw.items()}


def tv_distance(pmf: NoisePmf, reference: Dict[int, "mpmath.mpf"]) -> float:
    keys = set(pmf.weights) | set(reference)
    with mpmath.workprec(128):
        diff = mpmath.fsum(
            abs(mpmath.mpf(pmf.weights.get(r, 0)) / pmf.denominator - reference.get(r, 0)) for r in keys
        )
        return float(diff / 2)
