"""
Public parameter generation for VDDP sessions.

Derives the committed powers from a seed, checks them with a pairing,
and writes them to a params file that both provers and verifiers load.

Usage (from project root):
    python scripts/generate_params.py --degree 1024 --seed demo --output params.bin

Size the setup for a privacy target instead of a fixed degree:
    python scripts/generate_params.py --epsilon 1 --delta 1e-6 --d 4 --output params.bin
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from vddp.accountant import laplace_dp_closed_form, suggest_params
from vddp.commit import check_params, save_params, setup
from vddp.constraints import build_constraints


def required_degree(args: argparse.Namespace) -> int:
    if args.degree is not None:
        return args.degree
    params = suggest_params(args.epsilon, args.delta)
    report = laplace_dp_closed_form(params, 1)
    print(f"  Laplace circuit : t={params.t_scale} gamma={params.gamma} n_lap={params.n_lap}")
    print(f"  Guarantee       : eps={float(report.epsilon):.4f} delta={float(report.delta):.3e}")
    return build_constraints(params, args.d).required_degree


def main():
    parser = argparse.ArgumentParser(description="Generate VDDP public parameters")
    parser.add_argument("--degree", type=int, default=None, help="Largest committable degree")
    parser.add_argument("--epsilon", type=float, default=1.0)
    parser.add_argument("--delta", type=float, default=1e-6)
    parser.add_argument("--d", type=int, default=1, help="Output dimension when sizing from a target")
    parser.add_argument("--seed", default=None, help="Seed string; omit for OS randomness")
    parser.add_argument("--backend", choices=["bls12_381", "exponent"], default="bls12_381")
    parser.add_argument("--output", default="params.bin")
    args = parser.parse_args()

    print("\n[1/3] Sizing setup...")
    degree = required_degree(args)
    print(f"  Degree          : {degree}")

    print("\n[2/3] Deriving powers...")
    pp = setup(degree, seed=args.seed, backend=args.backend, retain_trapdoor=False)
    if not check_params(pp):
        print("  Pairing check failed", file=sys.stderr)
        sys.exit(1)

    print("\n[3/3] Writing params...")
    save_params(pp, args.output)

    print("\n" + "=" * 55)
    print(f"  File        : {args.output}")
    print(f"  Backend     : {pp.backend.name}")
    print(f"  Fingerprint : {pp.fingerprint()}")
    print()


if __name__ == "__main__":
    main()
