"""Benchmark sweeps over sessions: timings, bytes, verifier cost and error per grid cell."""

import csv
import itertools
import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from vddp.accountant import laplace_dp_closed_form
from vddp.i2dp.session import SessionOutcome, run_session
from vddp.models import BenchRow, BenchSpec, SessionConfig, VddlmSettings, VrrSettings
from vddp.randomness import LaplaceParams, derive_bernoulli

logger = logging.getLogger(__name__)

DEFAULT_NU = 16
DEFAULT_MAX_GAMMA = 24


def bench_columns() -> List[str]:
    return list(BenchRow.model_fields)


def default_gamma(t_scale: Fraction, delta: float, max_gamma: int = DEFAULT_MAX_GAMMA) -> int:
    """Smallest gamma whose support 2^gamma covers t * ln(2/delta)."""
    reach = max(float(t_scale) * math.log(2 / delta), 1.0)
    return min(max_gamma, max(0, math.ceil(math.log2(reach))))


def rr_probabilities(epsilon: float, limit: int = 1 << 20) -> List[str]:
    """Binary randomized response truthful/flip probabilities e^eps/(1+e^eps), 1/(1+e^eps)."""
    with mpmath.workdps(30):
        keep = mpmath.exp(epsilon) / (1 + mpmath.exp(epsilon))
    p = Fraction(str(keep)).limit_denominator(limit)
    return [str(p), str(1 - p)]


def _l1(output: Optional[Sequence[float]], truth: Sequence[float]) -> float:
    if output is None:
        return 0.0
    return float(sum(abs(a - b) for a, b in zip(output, truth)))


def _cell_seed(base: int, index: int, repetition: int) -> int:
    return base * 1_000_003 + index * 1009 + repetition


def _timings(outcome: SessionOutcome) -> Tuple[float, float]:
    seconds = outcome.metrics.role_seconds
    prove = seconds.get("client", 0.0) + seconds.get("server", 0.0)
    return prove * 1000, seconds.get("verifier", 0.0) * 1000


def _mean_verifier_ops(outcome: SessionOutcome, prefix: str) -> int:
    ops = [v for k, v in outcome.metrics.verifier_ops.items() if k.startswith(prefix)]
    return int(round(sum(ops) / len(ops))) if ops else 0


def _vddlm_cells(spec: BenchSpec) -> Iterator[Dict]:
    for d, eps, nu, n_ser, n_cli in itertools.product(spec.d, spec.epsilon, spec.nus or [DEFAULT_NU],
                                                      spec.n_ser, spec.n_cli):
        yield {"d": d, "epsilon": eps, "nu": nu, "n_ser": n_ser, "n_cli": n_cli, "omega_bits": 0}


def _vrr_cells(spec: BenchSpec) -> Iterator[Dict]:
    for eps, bits, n_cli in itertools.product(spec.epsilon, spec.omega_bits, spec.n_cli):
        yield {"d": 1, "epsilon": eps, "omega_bits": bits, "n_ser": 1, "n_cli": n_cli}


def _vddlm_params(spec: BenchSpec, eps: float, nu: int) -> LaplaceParams:
    t = Fraction(1 / eps).limit_denominator(1 << 20)
    gamma = spec.gamma if spec.gamma is not None else default_gamma(t, spec.delta, spec.max_gamma or DEFAULT_MAX_GAMMA)
    return derive_bernoulli(t, gamma, nu, allow_truncation=True)


def run_cell(spec: BenchSpec, cell: Dict, index: int, repetition: int) -> BenchRow:
    """One session for one grid cell and repetition."""
    seed = _cell_seed(spec.seed, index, repetition)
    common = dict(
        session_id=f"bench-{index}-{repetition}",
        mechanism=spec.mechanism,
        n_cli=cell["n_cli"],
        n_ser=cell["n_ser"],
        seed=seed,
        backend=spec.backend,
    )
    if spec.mechanism == "vddlm":
        params = _vddlm_params(spec, cell["epsilon"], cell["nu"])
        config = SessionConfig(
            **common,
            vddlm=VddlmSettings(d=cell["d"], t_scale=str(params.t_scale), gamma=params.requested_gamma,
                                nu=cell["nu"], allow_truncation=True),
        )
        outcome = run_session(config)
        report = laplace_dp_closed_form(params, 1, cell["n_ser"])
        realized_eps, delta = float(report.epsilon), float(report.delta)
        truth = outcome.extra["true_aggregate"]
        n_lap = params.n_lap
        ops = _mean_verifier_ops(outcome, "server-")
    else:
        config = SessionConfig(
            **common,
            vrr=VrrSettings(k=2, probs=rr_probabilities(cell["epsilon"]), omega_bits=cell["omega_bits"]),
        )
        outcome = run_session(config)
        realized_eps, delta = outcome.extra["realized_epsilon"], 0.0
        truth = outcome.extra["true_histogram"]
        n_lap = 0
        ops = _mean_verifier_ops(outcome, "client-")
    t_prove, t_verify = _timings(outcome)
    return BenchRow(
        mechanism=spec.mechanism,
        d=cell["d"],
        epsilon=cell["epsilon"],
        omega_bits=cell["omega_bits"],
        n_ser=cell["n_ser"],
        n_cli=cell["n_cli"],
        repetition=repetition,
        n_lap=n_lap,
        t_prove_ms=t_prove,
        t_verify_ms=t_verify,
        bytes=outcome.metrics.total_bytes,
        verifier_ops=ops,
        l1=_l1(outcome.output, truth),
        realized_epsilon=realized_eps,
        delta=delta,
        accepted=not outcome.aborted and len(outcome.accepted_clients) == cell["n_cli"],
    )


def run_bench(spec: BenchSpec) -> List[BenchRow]:
    """Every cell of the sweep, `spec.repetitions` times each."""
    cells = list(_vddlm_cells(spec) if spec.mechanism == "vddlm" else _vrr_cells(spec))
    logger.info("Benchmarking %d %s cells x %d repetitions", len(cells), spec.mechanism, spec.repetitions)
    rows = []
    for index, cell in enumerate(cells):
        for repetition in range(spec.repetitions):
            rows.append(run_cell(spec, cell, index, repetition))
    if spec.output:
        write_csv(rows, spec.output)
    return rows


def write_csv(rows: Iterable[BenchRow], path: Union[str, Path]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=bench_columns(), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row.model_dump())
    logger.info("Wrote bench rows to %s", target)
    return target


def read_csv(path: Union[str, Path]) -> List[BenchRow]:
    with open(path, "r", newline="", encoding="utf-8") as f:
        return [BenchRow.model_validate(row) for row in csv.DictReader(f)]


def loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log x."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("need at least two points of matching length")
    slope, _ = np.polyfit(np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float)), 1)
    return float(slope)
