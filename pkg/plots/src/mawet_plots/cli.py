"""Command-line entry point.

    mawet-plots render --in <csv...> --fig <kind> --out <path>

Kinds: power-vs-n, power-vs-k, nf-prob. Exit codes: 0 success (including
header-only inputs, which render empty axes), 1 bad arguments or missing
columns, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_KINDS, FigureSpec, MissingColumnError, \
    render_figure


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mawet-plots",
        description="Render figures from experiment result CSVs")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure")
    p.add_argument("--in", dest="inputs", nargs="+", required=True,
                   help="result CSV files")
    p.add_argument("--fig", required=True, choices=sorted(FIGURE_KINDS))
    p.add_argument("--out", required=True, help="output image path")
    p.add_argument("--title")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = FigureSpec(inputs=args.inputs, kind=args.fig, output=args.out,
                      title=args.title)
    try:
        curves = render_figure(spec)
    except MissingColumnError as exc:
        print("error: {}".format(exc), file=sys.stderr)
        return 1
    except ValueError as exc:
        print("error: {}".format(exc), file=sys.stderr)
        return 1
    except OSError as exc:
        print("error: {}".format(exc), file=sys.stderr)
        return 3
    print("wrote {} ({} curve{})".format(
        args.out, len(curves), "" if len(curves) == 1 else "s"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
