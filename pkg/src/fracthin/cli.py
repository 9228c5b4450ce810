"""Command-line entry point: run | sweep | verify | density."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import ConfigError, ExperimentConfig
from .driver import execute_density, execute_run, execute_sweep
from .runio import write_json
from .verify import run_verification


def _threads_default() -> int:
    env = os.environ.get("FRACTHIN_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracthin",
        description="Pseudospectral Galerkin solver for fractional thin-film flows")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="random seed override")

    p_run = sub.add_parser("run", help="execute a single simulation")
    common(p_run)

    p_sweep = sub.add_parser("sweep", help="execute a parameter sweep")
    common(p_sweep)
    p_sweep.add_argument("--threads", type=int, default=None,
                         help="worker processes (fallback: FRACTHIN_THREADS)")

    p_verify = sub.add_parser("verify", help="run the verification suite")
    p_verify.add_argument("--level", choices=("fast", "full"), default="fast")
    p_verify.add_argument("--out", default=None)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--inject-fault", default=None, choices=("eigenvalues",),
                          help=argparse.SUPPRESS)

    p_density = sub.add_parser(
        "density", help="flatness density of the initial datum over dyadic shells")
    common(p_density)
    return parser


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        cfg.set("output", "seed", args.seed)
    if args.out is not None:
        cfg.set("output", "directory", args.out)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            cfg = _load_config(args)
            out = cfg.get("output", "directory")
            result = execute_run(cfg, out)
            if not result.get("ok"):
                print(json.dumps(result, indent=1, sort_keys=True))
                return 2
            print(f"run complete: {out}/run.csv "
                  f"(config_hash={result['config_hash']})")
            return 0

        if args.command == "sweep":
            cfg = _load_config(args)
            threads = args.threads if args.threads is not None else _threads_default()
            out = cfg.get("output", "directory")
            rows = execute_sweep(cfg, out, threads=threads)
            bad = [r for r in rows if not r["ok"]]
            print(f"sweep complete: {len(rows)} rows, {len(bad)} failed "
                  f"-> {out}/sweep.csv")
            return 0 if not bad else 3

        if args.command == "verify":
            verdict = run_verification(level=args.level, seed=args.seed,
                                       fault=args.inject_fault)
            for check in verdict["checks"]:
                status = "PASS" if check["passed"] else "FAIL"
                print(f"[{status}] {check['name']}: value={check['value']:.3e} "
                      f"tol={check['tolerance']:.1e}")
            print(f"verify {verdict['level']}: "
                  f"{'all passed' if verdict['passed'] else 'FAILURES PRESENT'} "
                  f"({verdict['elapsed_seconds']:.1f}s)")
            if args.out:
                Path(args.out).mkdir(parents=True, exist_ok=True)
                write_json(Path(args.out) / "verify.json", verdict)
            return 0 if verdict["passed"] else 4

        if args.command == "density":
            cfg = _load_config(args)
            out = cfg.get("output", "directory")
            payload = execute_density(cfg, out)
            for row in payload["densities"]:
                print(f"delta={row['delta']:.5g}  density={row['density']:.6g}")
            print(f"supremum={payload['supremum']:.6g} -> {out}/density.json")
            return 0
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
