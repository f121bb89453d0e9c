"""Standalone `render` command: sweep CSVs in, figure images out."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .render import FigureSpec, render_iteration_histogram, render_wer_figure


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(f"{self.prog}: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="render", description=__doc__)
    parser.add_argument("--csv", action="append", required=True,
                        help="input sweep CSV (repeatable)")
    parser.add_argument("--series", action="append", required=True,
                        help="series filter like detector=ftd (repeatable)")
    parser.add_argument("--label", action="append",
                        help="legend label per series (repeatable, in order)")
    parser.add_argument("--bound", action="store_true",
                        help="overlay the closed-form FTD upper bound")
    parser.add_argument("--hist", action="store_true",
                        help="draw the iteration-tally histogram instead of WER curves")
    parser.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        if args.hist:
            if len(args.series) != 1:
                raise _UsageError("render: --hist needs exactly one --series")
            summary = render_iteration_histogram(args.csv, args.series[0], args.out)
            print(f"wrote {summary['out']} ({summary['points']} SNR points)")
        else:
            spec = FigureSpec(
                csv_paths=tuple(args.csv),
                series=tuple(args.series),
                labels=tuple(args.label) if args.label else None,
                bound=args.bound,
                out=args.out,
            )
            summary = render_wer_figure(spec)
            print(f"wrote {summary['out']} ({summary['series']} series, "
                  f"{summary['censored_points']} censored points)")
        return 0
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"render: error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
