"""Batch figure commands over fracthin run artifacts."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureSpec, render
from .io import SchemaError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracthin-plots",
        description="Render figures from fracthin CSV/JSON/snapshot artifacts")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("propagation", help="log-log support growth with slopes")
    p.add_argument("csv", help="run.csv path")
    p.add_argument("--r0", type=float, required=True, help="initial support radius")
    p.add_argument("--reference-exponent", type=float, default=0.0)
    p.add_argument("--out", required=True, help="output image path")

    p = sub.add_parser("dissipation", help="entropy balance curves")
    p.add_argument("csv", help="run.csv path")
    p.add_argument("--out", required=True)

    p = sub.add_parser("snapshots", help="solution profiles or heatmaps")
    p.add_argument("directory", help="snapshots directory with index.json")
    p.add_argument("--times", type=float, nargs="*", default=[])
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="sweep summary panels")
    p.add_argument("table", help="sweep.csv or sweep.json path")
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "propagation":
            spec = FigureSpec(kind="propagation", inputs=[args.csv],
                              output=args.out, r0=args.r0,
                              reference_exponent=args.reference_exponent)
        elif args.command == "dissipation":
            spec = FigureSpec(kind="dissipation", inputs=[args.csv],
                              output=args.out)
        elif args.command == "snapshots":
            spec = FigureSpec(kind="snapshots", inputs=[args.directory],
                              output=args.out, times=args.times)
        else:
            spec = FigureSpec(kind="sweep", inputs=[args.table], output=args.out)
        result = render(spec)
    except (SchemaError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in result["files"]:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
