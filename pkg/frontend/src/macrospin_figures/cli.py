"""Command line for the figure renderer.

    macrospin-figures render --fig fig2 --in saturated.csv --meta meta.json --out fig2.png

Exit codes: 2 for bad arguments, 4 for missing columns or empty inputs.
"""

from __future__ import annotations

import argparse
import sys

from .render import FIGURE_IDS, FigureSpec, MissingColumnError, NoDataError, render

EXIT_BAD_ARGS = 2
EXIT_BAD_DATA = 4


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="macrospin-figures", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)
    sub = subs.add_parser("render", help="render one figure from CSV inputs")
    sub.add_argument("--fig", required=True, choices=FIGURE_IDS)
    sub.add_argument("--in", dest="inputs", action="append", required=True,
                     help="input CSV (repeatable for multi-series figures)")
    sub.add_argument("--meta", help="JSON metadata sidecar for annotations")
    sub.add_argument("--out", required=True, help="output image path")
    sub.add_argument("--label", dest="labels", action="append", default=[],
                     help="series label, by input order (figS1)")
    sub.add_argument("--dpi", type=int, default=150)
    args = parser.parse_args(argv)

    try:
        spec = FigureSpec(
            figure=args.fig,
            inputs=args.inputs,
            out=args.out,
            meta=args.meta,
            labels=args.labels,
            dpi=args.dpi,
        )
    except ValueError as exc:
        print(f"invalid figure spec: {exc}", file=sys.stderr)
        return EXIT_BAD_ARGS
    try:
        render(spec)
    except MissingColumnError as exc:
        print(f"cannot render {args.fig}: {exc}", file=sys.stderr)
        return EXIT_BAD_DATA
    except (NoDataError, OSError) as exc:
        print(f"cannot render {args.fig}: {exc}", file=sys.stderr)
        return EXIT_BAD_DATA
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
