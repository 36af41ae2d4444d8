"""Render toolkit output files into figures.

Usage: nmon-render --kind heatmap --in phase_diagram.csv --out fig3a.png
"""

from __future__ import annotations

import argparse
import sys

from .figures import KINDS, FigureSpec, render
from .schemas import SchemaError

__all__ = ["main"]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nmon-render",
        description="Render nmon output CSV files into figures.",
    )
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--in", dest="path", required=True, help="input data file")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--manifest", help="run manifest (potential overlay, code space)")
    parser.add_argument("--metric", help="heatmap metric column", default=None)
    parser.add_argument("--title", help="figure title", default=None)
    args = parser.parse_args(argv)

    options = {}
    if args.metric:
        options["metric"] = args.metric
    if args.title:
        options["title"] = args.title

    try:
        spec = FigureSpec(
            kind=args.kind, path=args.path, out=args.out,
            manifest=args.manifest, options=options,
        )
        render(spec)
    except (SchemaError, OSError) as exc:
        print(f"nmon-render: {exc}", file=sys.stderr)
        return 1
    print(args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
