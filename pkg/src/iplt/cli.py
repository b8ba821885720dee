"""Command line entry point: ``iplt <subcommand> ...`` (or ``python3 -m iplt``)."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import audit as audit_mod
from .capacity import closed_form_converse, compute_bounds, ilp_converse_oracle
from .client import ServiceError, retrieve
from .dataset import generate_dataset, read_dataset
from .errors import IpltError
from .field import PrimeField
from .fixtures import INSTANCES, replay
from .protocol import Demand, gen_query, make_layout
from .server import LISTEN_ENV, default_address, serve


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _matrix(text: str) -> list[list[int]]:
    """Rows separated by ';', entries by ',' or spaces: ``"7,3;3,6"``."""
    rows = [_int_list(r) for r in text.split(";") if r.strip()]
    if not rows or len({len(r) for r in rows}) != 1:
        raise argparse.ArgumentTypeError("matrix rows must be nonempty and of equal length")
    return rows


def _add_kdl(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, required=True, help="number of messages K")
    p.add_argument("--d", type=int, required=True, help="demand support size D")
    p.add_argument("--l", type=int, required=True, help="number of combinations L")


def cmd_bounds(args) -> int:
    b = compute_bounds(args.k, args.d, args.l)
    if args.json:
        print(json.dumps({"K": b.K, "D": b.D, "L": b.L, "R": b.R, "S": b.S,
                          "lower": str(b.lower), "upper": str(b.upper), "tight": b.tight}))
    else:
        print(b.describe())
    return 0


def cmd_ilp(args) -> int:
    value, witness = ilp_converse_oracle(args.k, args.d, args.l)
    closed = closed_form_converse(args.k, args.d, args.l)
    parts = ",".join(f"T{j}={c}" for j, c in sorted(witness.items(), reverse=True))
    print(f"value={value} closed_form={closed} witness={parts} agree={'yes' if value == closed else 'no'}")
    return 0 if value == closed else 1


def cmd_gen_dataset(args) -> int:
    ds = generate_dataset(args.k, args.p, args.seed)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(ds.dumps())
        print(f"wrote {ds.K} messages over F_{ds.p} to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(ds.dumps())
    return 0


def cmd_serve(args) -> int:
    ds = read_dataset(args.dataset)
    try:
        serve(ds, args.listen or default_address(), announce=lambda s: print(s, flush=True))
    except KeyboardInterrupt:
        pass
    return 0


def cmd_retrieve(args) -> int:
    if args.v is None and args.l is None:
        print("retrieve: give --v MATRIX or --random-mds --l L", file=sys.stderr)
        return 2
    try:
        result = retrieve(args.server or default_address(), args.w, args.v, L=args.l,
                          seed=args.seed, mode=args.sampler)
    except ServiceError as exc:
        print(f"server error {exc.code}: {exc.detail}", file=sys.stderr)
        return 1
    lines = result.summary()
    status = 0
    if args.verify_dataset:
        ds = read_dataset(args.verify_dataset)
        expected = result.demand.evaluate(ds.X)
        match = np.array_equal(expected, result.Z)
        lines.append(f"oracle: {'match' if match else 'MISMATCH'} (local V X_W = {' '.join(map(str, expected))})")
        status = 0 if match else 1
    if args.json:
        print(json.dumps({"Z": [int(z) for z in result.Z], "download": result.download,
                          "rows": result.rows, "rate": str(result.rate),
                          "lower": str(result.bounds.lower), "upper": str(result.bounds.upper),
                          "W": list(result.demand.W), "V": result.demand.V.tolist()}))
    else:
        print("\n".join(lines))
    return status


def cmd_audit(args) -> int:
    rng = np.random.default_rng(args.seed)
    layout = make_layout(args.k, args.d, args.l)
    report = audit_mod.monte_carlo_audit(args.k, args.d, args.l, args.trials, rng, full=args.full)
    report.seed = args.seed

    field = PrimeField(args.p)
    prior = Fraction(args.d, args.k)
    uniform = 0
    for _ in range(args.queries):
        demand = Demand.random(args.k, args.d, args.l, field, rng)
        query, _ = gen_query(demand, rng)
        uniform += all(x == prior for x in audit_mod.structural_posterior(layout, query.pi))
    ok = report.passes(args.threshold) and uniform == args.queries
    if args.json:
        data = json.loads(report.to_json())
        data.update(structural_queries=args.queries, structural_uniform=uniform,
                    threshold=args.threshold, passed=ok)
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        print(report.to_text())
        print(f"structural posterior uniform for {uniform}/{args.queries} generated queries")
        print(f"verdict: {'PASS' if ok else 'FAIL'} (threshold {args.threshold})")
    return 0 if ok else 1


def cmd_demo(args) -> int:
    inst = INSTANCES[args.example]
    report = replay(args.example)
    print(f"instance {args.example} ({inst.name}) over F_13")
    print("\n".join(report.lines()))
    print("PASS" if report.ok else "FAIL")
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iplt", description="Private linear transformation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="capacity bounds and tightness")
    _add_kdl(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("ilp-oracle", help="exhaustive converse integer program")
    _add_kdl(p)
    p.set_defaults(func=cmd_ilp)

    p = sub.add_parser("gen-dataset", help="write a random message file")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path (default: stdout)")
    p.set_defaults(func=cmd_gen_dataset)

    p = sub.add_parser("serve", help="answer queries over TCP")
    p.add_argument("--dataset", required=True)
    p.add_argument("--listen", help=f"HOST:PORT (default: ${LISTEN_ENV} or 127.0.0.1:7431)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("retrieve", help="run one private retrieval session")
    p.add_argument("--server", help=f"HOST:PORT (default: ${LISTEN_ENV} or 127.0.0.1:7431)")
    p.add_argument("--w", type=_int_list, required=True, help="demand support, e.g. 2,4,5")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--v", type=_matrix, help="coefficients, rows split by ';', e.g. '7,3;3,6'")
    src.add_argument("--random-mds", action="store_true", help="draw a random MDS coefficient matrix")
    p.add_argument("--l", type=int, help="rows of the random coefficient matrix")
    p.add_argument("--seed", type=int)
    p.add_argument("--sampler", choices=["grs", "uniform-rejection"], default="grs")
    p.add_argument("--verify-dataset", help="compare Z against V X_W computed from this file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("audit", help="Monte Carlo and structural privacy audit")
    _add_kdl(p)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p", type=int, default=101, help="field for the structural check")
    p.add_argument("--queries", type=int, default=200, help="queries for the structural check")
    p.add_argument("--threshold", type=float, default=0.02)
    p.add_argument("--full", action="store_true", help="run full query generation per trial")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("demo", help="replay a worked F_13 instance and compare every matrix")
    p.add_argument("--example", type=int, choices=sorted(INSTANCES), required=True)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "random_mds", False) and args.l is None:
        parser.error("--random-mds needs --l")
    if getattr(args, "v", None) is not None:
        args.l = None
    try:
        return args.func(args)
    except IpltError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
