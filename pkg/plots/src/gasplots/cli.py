"""Command line front end: bosegas-plot <kind> --in PATH [--in PATH2] --out PATH."""

import argparse
import sys

from .render import SCHEMAS, PlotJob, SchemaError, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bosegas-plot",
        description="Render bosegas CSV outputs to image files")
    parser.add_argument("kind", choices=sorted(SCHEMAS))
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="PATH", help="input CSV (repeatable)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--title", default="")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        render(PlotJob(args.kind, args.inputs, args.out, args.title))
    except SchemaError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
