"""figures command line: render chart images from a sweep summary CSV."""

import argparse
import json
import sys

from .charts import FIGURE_IDS, render_all
from .data import FigureDataError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render simulator sweep figures (B1-B6, C1-C7, D1-D2) as PNG files.",
    )
    parser.add_argument("--summary", required=True, help="sweep summary CSV")
    parser.add_argument("--real", help="metrics JSON from the analyzer, drawn as dashed overlays")
    parser.add_argument("--out", required=True, help="output directory for images")
    parser.add_argument("--only", help=f"comma-separated figure ids, e.g. B1,C5 (all of {','.join(FIGURE_IDS)})")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    only = [part.strip() for part in args.only.split(",") if part.strip()] if args.only else None
    try:
        results = render_all(args.summary, args.out, real_csv=args.real, only=only)
    except (FigureDataError, OSError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1
    for result in results:
        print(f"{result.figure_id} {result.path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
