"""Privacy and utility accounting for the discrete Laplace circuit and randomized response."""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import mpmath

from vddp.errors import InfeasibleParamsError, ParameterError, PrecisionCollapseError
from vddp.randomness import MAX_PMF_GAMMA, LaplaceParams, derive_bernoulli, noise_pmf, point_mass

logger = logging.getLogger(__name__)

EPS_PRECISION_BITS = 128


def _log(x: Fraction) -> "mpmath.mpf":
    with mpmath.workprec(EPS_PRECISION_BITS):
        return mpmath.log(mpmath.mpf(x.numerator)) - mpmath.log(mpmath.mpf(x.denominator))


def _decimal(x: Fraction, digits: int = 20) -> str:
    with mpmath.workprec(EPS_PRECISION_BITS):
        return mpmath.nstr(mpmath.mpf(x.numerator) / x.denominator, digits)


@dataclass
class PrivacyReport:
    """(ε, δ) of one mechanism configuration with the events achieving it."""

    epsilon: "mpmath.mpf"
    delta: Fraction
    max_ratio: Fraction
    witness: Dict[str, Any]
    delta_sens: int
    n_lap: int
    expected_l1: Fraction
    n_ser: int = 1
    method: str = "closed-form"
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def ddp_tolerance(self) -> int:
        """Servers that may collude while the guarantee still holds."""
        return self.n_ser - 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "epsilon": float(self.epsilon),
            "epsilon_str": mpmath.nstr(self.epsilon, 20),
            "delta": _decimal(self.delta) if self.delta else "0",
            "delta_exact": str(self.delta),
            "n_lap": self.n_lap,
            "expected_l1": _decimal(self.expected_l1),
            "delta_sens": self.delta_sens,
            "witness": self.witness,
            "ddp_tolerance": self.ddp_tolerance,
            "method": self.method,
        }


def step_ratios(params: LaplaceParams) -> Tuple[Fraction, List[Fraction]]:
    """a_z = Pr[0]/Pr[1] and a_i = Pr[|r| = 2^i + 1]/Pr[|r| = 2^i]."""
    p_z = params.zero_params.realized_p
    ps = [b.realized_p for b in params.mag_params]
    none_set = Fraction(1)
    for p in ps:
        none_set *= 1 - p
    a_z = p_z / ((1 - p_z) / 2 * none_set)
    a_i = []
    below_one, below_zero = Fraction(1), Fraction(1)
    for p in ps:
        a_i.append(p * below_zero / ((1 - p) * below_one))
        below_one *= p
        below_zero *= 1 - p
    return a_z, a_i


def expected_l1(params: LaplaceParams) -> Fraction:
    """E|noise| = (1 - p_z)(1 + sum 2^i p_i)."""
    p_z = params.zero_params.realized_p
    return (1 - p_z) * (1 + sum((1 << i) * b.realized_p for i, b in enumerate(params.mag_params)))


def _boundary_delta(params: LaplaceParams, delta_sens: int) -> Tuple[Fraction, List[int]]:
    bound = params.support_bound
    points = [-bound + i for i in range(delta_sens)]
    return sum((point_mass(params, r) for r in points), Fraction(0)), points


def _trailing_ones(m: int) -> int:
    return ((m + 1) & -(m + 1)).bit_length() - 1


def _step(r: int, a_z: Fraction, a_i: List[Fraction]) -> Fraction:
    # Pr[r] / Pr[r - 1]
    if r >= 2:
        return a_i[_trailing_ones(r - 2)]
    if r == 1:
        return 1 / a_z
    if r == 0:
        return a_z
    return 1 / a_i[_trailing_ones(-r - 1)]


def _magnitude_windows(a_i: List[Fraction], gamma: int, delta_sens: int) -> List[Tuple[Fraction, int]]:
    """
    Products a_T(m0) ... a_T(m0 + Δ - 1) over every start m0 in [0, 2^γ - 1 - Δ].

    Within a block of 2^k ≥ Δ consecutive magnitudes only the last one has more
    than k trailing ones, so each residue s = m0 mod 2^k gives one fixed product
    times at most one level a_{k+j}. That leaves 2^k · γ candidates instead of 2^γ.
    """
    last = (1 << gamma) - 1 - delta_sens
    if last < 0:
        return []
    if delta_sens > 1 << (gamma - 1):
        out = []
        for m0 in range(last + 1):
            prod = Fraction(1)
            for m in range(m0, m0 + delta_sens):
                prod *= a_i[_trailing_ones(m)]
            out.append((prod, m0))
        return out
    k = (delta_sens - 1).bit_length()
    block = 1 << k
    out = []
    for s in range(block):
        base, special = Fraction(1), None
        for t in range(delta_sens):
            pos = (s + t) % block
            if pos == block - 1:
                special = t
            else:
                base *= a_i[_trailing_ones(pos)]
        if special is None:
            if s <= last:
                out.append((base, s))
            continue
        for j in range(gamma - k):
            m0 = (1 << (j + k)) - 1 - special
            if 0 <= m0 <= last:
                out.append((base * a_i[k + j], m0))
    return out


def laplace_dp_closed_form(params: LaplaceParams, delta_sens: int, n_ser: int = 1) -> PrivacyReport:
    """
    (ε, δ) of the Laplace circuit for sensitivity Δ from its step ratios.

    Pr[r]/Pr[r - Δ] is the product of Δ consecutive step ratios. Windows on the
    positive or negative side depend only on the trailing ones of the magnitudes
    they cover, so they are enumerated per level rather than per point; the few
    windows touching 0 or 1 are multiplied out directly.

    Args:
        params: Realized circuit parameters
        delta_sens: L1 sensitivity Δ
        n_ser: Number of servers adding noise (collusion metadata only)

    Returns:
        PrivacyReport with ε the log of the largest window product in either
        direction and δ the mass on {-2^γ + i : i < Δ}
    """
    if delta_sens < 0:
        raise ParameterError("sensitivity must be non-negative")
    if params.gamma > MAX_PMF_GAMMA:
        raise ParameterError(f"gamma {params.gamma} exceeds enumeration bound {MAX_PMF_GAMMA}")
    l1 = expected_l1(params)
    if delta_sens == 0:
        return PrivacyReport(mpmath.mpf(0), Fraction(0), Fraction(1), {}, 0, params.n_lap, l1, n_ser)

    a_z, a_i = step_ratios(params)
    bound = params.support_bound
    # (Pr[r]/Pr[r - Δ], r)
    windows: List[Tuple[Fraction, int]] = []
    for prod, m0 in _magnitude_windows(a_i, params.gamma, delta_sens):
        windows.append((prod, m0 + delta_sens + 1))
        windows.append((1 / prod, -m0 - 1))
    for r in range(max(0, delta_sens - bound), min(delta_sens, bound) + 1):
        prod = Fraction(1)
        for x in range(r - delta_sens + 1, r + 1):
            prod *= _step(x, a_z, a_i)
        windows.append((prod, r))

    up_ratio, up_r = max(windows, key=lambda w: w[0])
    down_ratio, down_end = min(windows, key=lambda w: w[0])
    if up_ratio >= 1 / down_ratio:
        max_ratio, r_star, direction = up_ratio, up_r, "D/D'"
    else:
        max_ratio, r_star, direction = 1 / down_ratio, down_end - delta_sens, "D'/D"
    delta, escaping = _boundary_delta(params, delta_sens)
    with mpmath.workprec(EPS_PRECISION_BITS):
        epsilon = _log(max_ratio)
    return PrivacyReport(
        epsilon=epsilon,
        delta=delta,
        max_ratio=max_ratio,
        witness={"r": r_star, "direction": direction, "ratio": str(max_ratio), "escaping": escaping},
        delta_sens=delta_sens,
        n_lap=params.n_lap,
        expected_l1=l1,
        n_ser=n_ser,
        extra={"step_ratio": str(max(max(a_z, *a_i), 1 / min(a_z, *a_i)))},
    )


def laplace_dp_exact(params: LaplaceParams, delta_sens: int, n_ser: int = 1, exact_max_gamma: Optional[int] = None) -> PrivacyReport:
    """Brute-force (ε, δ) comparing the pmf with its shift by ±Δ in both directions."""
    if exact_max_gamma is None:
        from vddp.config import get_accountant_settings

        exact_max_gamma = int(get_accountant_settings().get("exact_max_gamma", 16))
    if params.gamma > exact_max_gamma:
        raise ParameterError(f"gamma {params.gamma} exceeds exact oracle bound {exact_max_gamma}")
    l1 = expected_l1(params)
    if delta_sens == 0:
        return PrivacyReport(mpmath.mpf(0), Fraction(0), Fraction(1), {}, 0, params.n_lap, l1, n_ser, method="exact")

    pmf = noise_pmf(params)
    best_ratio, best_r, best_dir = Fraction(0), None, None
    best_delta, best_escape = Fraction(0), []
    for direction, shift in (("D/D'", abs(delta_sens)), ("D'/D", -abs(delta_sens))):
        other = pmf.shifted(shift)
        escaping = sorted(r for r in pmf.weights if pmf.weights[r] and not other.weights.get(r))
        escaping_mass = Fraction(sum(pmf.weights[r] for r in escaping), pmf.denominator)
        for r, w in pmf.weights.items():
            w_other = other.weights.get(r, 0)
            if w and w_other:
                ratio = Fraction(w, w_other)
                if ratio > best_ratio:
                    best_ratio, best_r, best_dir = ratio, r, direction
        if escaping_mass > best_delta:
            best_delta, best_escape = escaping_mass, escaping
    with mpmath.workprec(EPS_PRECISION_BITS):
        epsilon = _log(best_ratio)
    return PrivacyReport(
        epsilon=epsilon,
        delta=best_delta,
        max_ratio=best_ratio,
        witness={"r": best_r, "direction": best_dir, "ratio": str(best_ratio), "escaping": best_escape},
        delta_sens=delta_sens,
        n_lap=params.n_lap,
        expected_l1=l1,
        n_ser=n_ser,
        method="exact",
    )


def rr_epsilon(A: Sequence[int], omega_size: int) -> "mpmath.mpf":
    """
    ε = log(max_k A_k / min_{k≥1} A_k) of randomized response with p_k = A_k / |Ω|.

    Class 0 is the truthful answer and only the lying classes enter the minimum.
    """
    if len(A) < 2:
        raise ParameterError("randomized response needs at least two classes")
    if sum(A) != omega_size:
        raise ParameterError(f"multiplicities sum to {sum(A)}, expected {omega_size}")
    if any(a < 0 for a in A):
        raise ParameterError("multiplicities must be non-negative")
    if any(a == 0 for a in A):
        raise ParameterError("infinite epsilon: some response class has zero probability")
    return _log(Fraction(max(A), min(A[1:])))


def _t_grid(center: float, steps_below: int = 2, steps_above: int = 24) -> List[Fraction]:
    # Ratio 2^(1/8) between neighbouring scales
    return [Fraction(center * 2 ** (k / 8)).limit_denominator(1 << 20) for k in range(-steps_below, steps_above + 1)]


def suggest_params(
    epsilon_target: float,
    delta_target: float,
    delta_sens: int = 1,
    max_gamma: Optional[int] = None,
    nus: Optional[Sequence[int]] = None,
) -> LaplaceParams:
    """
    Cheapest Laplace circuit meeting (ε, δ) targets.

    Args:
        epsilon_target: Upper bound on ε
        delta_target: Upper bound on δ
        delta_sens: L1 sensitivity Δ
        max_gamma: Cap on magnitude levels
        nus: Precisions to try

    Returns:
        Params with minimal n_lap (ties broken by expected L1)

    Raises:
        InfeasibleParamsError: Nothing in the grid meets both targets
    """
    if epsilon_target <= 0 or delta_target <= 0 or delta_sens < 1:
        raise ParameterError("targets must be positive and sensitivity at least 1")
    from vddp.config import get_accountant_settings

    settings = get_accountant_settings()
    max_gamma = max_gamma if max_gamma is not None else int(settings.get("max_gamma", 24))
    nus = list(nus if nus is not None else settings.get("search_nus", [16, 24, 32]))

    best: Optional[Tuple[Tuple[int, Fraction], LaplaceParams]] = None
    nearest: Optional[Tuple[float, Dict[str, Any]]] = None
    ln_delta = math.log(2 / delta_target)
    for t in _t_grid(delta_sens / epsilon_target):
        if t <= 0:
            continue
        center = max(0, math.ceil(math.log2(max(float(t) * ln_delta, 1.0))))
        for gamma in range(max(0, center - 2), min(max_gamma, center + 2) + 1):
            for nu in nus:
                try:
                    params = derive_bernoulli(t, gamma, nu)
                except PrecisionCollapseError:
                    continue
                report = laplace_dp_closed_form(params, delta_sens)
                eps = float(report.epsilon)
                if eps <= epsilon_target and report.delta <= Fraction(delta_target):
                    key = (params.n_lap, report.expected_l1)
                    if best is None or key < best[0]:
                        best = (key, params)
                    continue
                miss = max(eps / epsilon_target, float(report.delta) / delta_target)
                if nearest is None or miss < nearest[0]:
                    nearest = (miss, {"t_scale": str(t), "gamma": gamma, "nu": nu, "epsilon": eps, "delta": float(report.delta)})
    if best is None:
        raise InfeasibleParamsError(
            f"no feasible parameters for epsilon={epsilon_target}, delta={delta_target}",
            nearest_miss=nearest[1] if nearest else None,
        )
    logger.debug("Suggested t=%s gamma=%d n_lap=%d", best[1].t_scale, best[1].gamma, best[1].n_lap)
    return best[1]
