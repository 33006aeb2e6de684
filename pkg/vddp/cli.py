"""Command-line entry point: accountant queries, parameter search, sampling, sessions and sweeps."""

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from vddp import __version__
from vddp.accountant import expected_l1, laplace_dp_closed_form, laplace_dp_exact, suggest_params
from vddp.bench import run_bench
from vddp.errors import InfeasibleParamsError, ParameterError, TransportError
from vddp.i2dp.session import run_session
from vddp.models import BenchSpec, SessionConfig, VddlmSettings, VrrSettings
from vddp.randomness import derive_bernoulli, sample_noise
from vddp.rng import Rng

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SESSION_ERROR = 1
EXIT_USAGE = 2


def _emit(payload: Dict[str, Any]) -> None:
    print(json.dumps(payload, indent=2, default=str))


def _int_list(raw: Optional[str]) -> Optional[List[int]]:
    return [int(v) for v in raw.split(",")] if raw else None


def _float_list(raw: str) -> List[float]:
    return [float(v) for v in raw.split(",")]


def cmd_accountant(args: argparse.Namespace) -> int:
    params = derive_bernoulli(Fraction(args.t), args.gamma, args.nu, allow_truncation=args.allow_truncation)
    if args.exact:
        report = laplace_dp_exact(params, args.sens, args.n_ser)
    else:
        report = laplace_dp_closed_form(params, args.sens, args.n_ser)
    _emit({"params": params.to_config(), "report": report.to_dict()})
    return EXIT_OK


def cmd_suggest(args: argparse.Namespace) -> int:
    try:
        params = suggest_params(args.epsilon, args.delta, args.sens, max_gamma=args.max_gamma, nus=_int_list(args.nus))
    except InfeasibleParamsError as e:
        _emit({"feasible": False, "error": str(e), "nearest_miss": e.nearest_miss})
        return EXIT_USAGE
    report = laplace_dp_closed_form(params, args.sens)
    _emit({"feasible": True, "params": params.to_config(), "report": report.to_dict()})
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    params = derive_bernoulli(Fraction(args.t), args.gamma, args.nu, allow_truncation=True)
    samples = sample_noise(params, Rng(args.seed), args.n)
    mean_abs = sum(abs(v) for v in samples) / len(samples) if samples else 0.0
    _emit({
        "n_lap": params.n_lap,
        "samples": samples,
        "mean_abs": mean_abs,
        "expected_l1": float(expected_l1(params)),
    })
    return EXIT_OK


def _session_flags(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        "session_id": args.session_id,
        "n_cli": args.n_cli,
        "seed": args.seed,
        "backend": args.backend,
        "challenge_mode": args.mode,
        "transport": args.transport,
        "dump_dir": args.dump_dir,
    }


def _run_and_emit(config: SessionConfig) -> int:
    outcome = run_session(config)
    _emit(outcome.to_dict())
    return EXIT_OK


def cmd_vrr(args: argparse.Namespace) -> int:
    if args.k < 2:
        raise ParameterError("K must be at least 2")
    if args.probs:
        probs = args.probs.split(",")
    else:
        # Keep the class with probability 1/2, shift uniformly otherwise
        probs = ["1/2"] + [str(Fraction(1, 2 * (args.k - 1)))] * (args.k - 1)
    config = SessionConfig(
        mechanism="vrr",
        n_ser=1,
        vrr=VrrSettings(k=args.k, probs=probs, omega_bits=args.omega_bits),
        **_session_flags(args),
    )
    return _run_and_emit(config)


def cmd_vddlm(args: argparse.Namespace) -> int:
    config = SessionConfig(
        mechanism="vddlm",
        n_ser=args.n_ser,
        vddlm=VddlmSettings(d=args.d, t_scale=args.t, gamma=args.gamma, nu=args.nu),
        **_session_flags(args),
    )
    return _run_and_emit(config)


def cmd_run(args: argparse.Namespace) -> int:
    config = SessionConfig.model_validate_json(Path(args.config).read_text(encoding="utf-8"))
    overrides = {k: v for k, v in (("transport", args.transport), ("dump_dir", args.dump_dir)) if v is not None}
    if overrides:
        config = config.model_copy(update=overrides)
    return _run_and_emit(config)


def cmd_bench(args: argparse.Namespace) -> int:
    if args.spec:
        spec = BenchSpec.model_validate_json(Path(args.spec).read_text(encoding="utf-8"))
    else:
        spec = BenchSpec(
            mechanism=args.mechanism,
            d=_int_list(args.d) or [1],
            epsilon=_float_list(args.epsilon),
            omega_bits=_int_list(args.omega_bits) or [4],
            n_ser=_int_list(args.n_ser) or [2],
            n_cli=_int_list(args.n_cli) or [3],
            nus=_int_list(args.nus),
            repetitions=args.repetitions,
            seed=args.seed,
            backend=args.backend,
        )
    if args.output:
        spec = spec.model_copy(update={"output": args.output})
    rows = run_bench(spec)
    if not spec.output:
        _emit({"rows": [row.model_dump() for row in rows]})
    else:
        _emit({"rows": len(rows), "output": spec.output})
    return EXIT_OK


def _add_session_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n-cli", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--session-id", default="session")
    parser.add_argument("--backend", choices=["bls12_381", "exponent"], default=None)
    parser.add_argument("--mode", choices=["interactive", "fiat-shamir"], default=None, help="Challenge mode")
    parser.add_argument("--transport", choices=["memory", "tcp"], default="memory")
    parser.add_argument("--dump-dir", default=None, help="Write transcripts under this directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vddp", description="Verifiable distributed differential privacy")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Overrides VDDP_LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("accountant", help="(epsilon, delta) of a Laplace circuit")
    p.add_argument("--t", required=True, help="Laplace scale, e.g. 10 or 5/2")
    p.add_argument("--gamma", type=int, required=True)
    p.add_argument("--nu", type=int, required=True)
    p.add_argument("--sens", type=int, default=1)
    p.add_argument("--n-ser", type=int, default=1)
    p.add_argument("--exact", action="store_true", help="Enumerate the pmf instead of the closed form")
    p.add_argument("--allow-truncation", action="store_true")
    p.set_defaults(func=cmd_accountant)

    p = sub.add_parser("suggest", help="Cheapest circuit meeting (epsilon, delta)")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--sens", type=int, default=1)
    p.add_argument("--max-gamma", type=int, default=None)
    p.add_argument("--nus", default=None, help="Comma-separated precisions to try")
    p.set_defaults(func=cmd_suggest)

    p = sub.add_parser("sample", help="Draw noise from the sampling circuit")
    p.add_argument("--t", required=True)
    p.add_argument("--gamma", type=int, required=True)
    p.add_argument("--nu", type=int, required=True)
    p.add_argument("-n", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("vrr", help="Run a verifiable randomized response session")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--probs", default=None, help="Comma-separated class probabilities")
    p.add_argument("--omega-bits", type=int, default=4)
    _add_session_flags(p)
    p.set_defaults(func=cmd_vrr)

    p = sub.add_parser("vddlm", help="Run a verifiable distributed Laplace session")
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--t", default="1")
    p.add_argument("--gamma", type=int, default=4)
    p.add_argument("--nu", type=int, default=8)
    p.add_argument("--n-ser", type=int, default=2)
    _add_session_flags(p)
    p.set_defaults(func=cmd_vddlm)

    p = sub.add_parser("run", help="Run a session from a JSON config file")
    p.add_argument("config")
    p.add_argument("--transport", choices=["memory", "tcp"], default=None)
    p.add_argument("--dump-dir", default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("bench", help="Sweep sessions and write CSV rows")
    p.add_argument("--spec", default=None, help="JSON bench spec; flags below are ignored when given")
    p.add_argument("--mechanism", choices=["vddlm", "vrr"], default="vddlm")
    p.add_argument("--d", default="1")
    p.add_argument("--epsilon", default="1.0")
    p.add_argument("--omega-bits", default="4")
    p.add_argument("--n-ser", default="2")
    p.add_argument("--n-cli", default="3")
    p.add_argument("--nus", default=None)
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", choices=["bls12_381", "exponent"], default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = args.log_level or os.getenv("VDDP_LOG_LEVEL", "WARNING")
    logging.basicConfig(level=level.upper(), format="%(asctime)s %(name)s %(levelname)s %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ParameterError, ValidationError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (TransportError, OSError) as e:
        print(f"session error: {e}", file=sys.stderr)
        return EXIT_SESSION_ERROR


if __name__ == "__main__":
    sys.exit(main())
