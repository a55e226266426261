"""One command-line script per figure kind, each taking --input/--output."""

from __future__ import annotations

import argparse
import sys

from .csvio import PlotInputError
from .figures import FigureSpec, render


def _run(kind: str, argv, multi_input: bool = False) -> int:
    parser = argparse.ArgumentParser(
        prog=f"pointer-plot-{kind}",
        description=f"Render a {kind} figure from the simulator CSV contract")
    if multi_input:
        parser.add_argument("--input", action="append", required=True,
                            help="input CSV (repeatable)")
    else:
        parser.add_argument("--input", required=True, help="input CSV")
    parser.add_argument("--output", required=True, help="output image path")
    args = parser.parse_args(argv)
    inputs = tuple(args.input) if multi_input else (args.input,)
    try:
        render(FigureSpec(inputs=inputs, kind=kind, output=args.output))
    except (PlotInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.output}")
    return 0


def main_trajectory3d(argv=None) -> int:
    return _run("trajectory3d", argv)


def main_sweep_line(argv=None) -> int:
    return _run("sweep-line", argv)


def main_elements(argv=None) -> int:
    return _run("elements-vs-lambda", argv)


def main_entropy(argv=None) -> int:
    return _run("entropy", argv, multi_input=True)


if __name__ == "__main__":
    sys.exit(main_trajectory3d())
