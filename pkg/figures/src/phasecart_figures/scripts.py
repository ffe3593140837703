"""One command-line script per figure kind, sharing --csv/--out flags."""

from __future__ import annotations

import argparse
import sys

from .render import FigureError, FigureSpec, render


def _build_parser(kind: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog=f"phasecart-fig-{kind}",
        description=f"Render a {kind} figure from a phasecart CSV output.")
    p.add_argument("--csv", required=True, help="input CSV path")
    p.add_argument("--out", required=True, help="output PNG path")
    p.add_argument("--xlabel", default="")
    p.add_argument("--ylabel", default="")
    p.add_argument("--title", default="")
    p.add_argument("--column", action="append", default=[],
                   metavar="ROLE=NAME",
                   help="override a column name, e.g. --column value=delta")
    return p


def _main(kind: str, argv=None) -> int:
    args = _build_parser(kind).parse_args(argv)
    columns = {}
    for item in args.column:
        role, _sep, name = item.partition("=")
        if not _sep or not role or not name:
            print(f"bad --column '{item}' (expected ROLE=NAME)",
                  file=sys.stderr)
            return 1
        columns[role] = name
    spec = FigureSpec(args.csv, kind, args.out, args.xlabel, args.ylabel,
                      args.title, columns)
    try:
        render(spec)
    except FileNotFoundError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except FigureError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    return 0


def main_separatrix(argv=None) -> int:
    return _main("separatrix", argv)


def main_fluctuation(argv=None) -> int:
    return _main("fluctuation", argv)


def main_fidelity(argv=None) -> int:
    return _main("fidelity", argv)


def main_heatmap(argv=None) -> int:
    return _main("heatmap", argv)


def main_error_map(argv=None) -> int:
    return _main("error-map", argv)


def main_scaling_fit(argv=None) -> int:
    return _main("scaling-fit", argv)
