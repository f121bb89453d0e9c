"""Command-line front end: WER sweeps to CSV, bound tables, codebook tools, traces."""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from .codebook import enumerate_code, pearson_code_size, verify_properties_AB
from .detectors import KMEANS_VARIANTS, kmeans_detect
from .metrics import wer_upper_bound
from .sim import SweepConfig, WerCurve, run_sweep

__all__ = ["CSV_COLUMNS", "write_csv", "main", "entry"]

CSV_COLUMNS = [
    "snr_db", "sigma", "detector", "channel", "q", "n", "constrained",
    "trials", "errors", "wer", "ci_low", "ci_high", "mean_iters",
    "hist_t1", "hist_t2", "hist_t3", "hist_t4plus", "degenerate_count", "seed",
]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # exit code 1 for usage problems instead of argparse's default 2
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(f"{self.prog}: {message}")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _fmt_wer(x: float) -> str:
    return f"{x:.3e}"


def write_csv(curve: WerCurve, stream) -> None:
    """Emit one row per SNR point with the fixed column set, locale-free."""
    cfg = curve.config
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for pt in curve.points:
        t1, t2, t3, t4 = pt.hist_buckets()
        est = pt.estimate
        writer.writerow([
            _fmt(pt.snr_db), _fmt(pt.sigma), cfg.detector, cfg.channel,
            cfg.q, cfg.n, "true" if cfg.constrained else "false",
            est.trials, est.errors, _fmt_wer(est.wer),
            _fmt(est.ci_low), _fmt(est.ci_high), _fmt(pt.mean_iterations),
            t1, t2, t3, t4, pt.degenerate_count, cfg.seed,
        ])


def _parse_snr(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    try:
        if len(parts) == 1:
            v = float(parts[0])
            return (v, v, 1.0)
        if len(parts) == 3:
            return (float(parts[0]), float(parts[1]), float(parts[2]))
    except ValueError:
        pass
    raise _UsageError(f"bad --snr value {text!r}; expected START:STOP:STEP or a single value")


def _parse_received(text: str) -> np.ndarray:
    try:
        return np.asarray([float(v) for v in text.split(",") if v.strip() != ""])
    except ValueError:
        raise _UsageError(f"bad --received value {text!r}; expected comma-separated reals")


def _build_parser() -> _Parser:
    parser = _Parser(prog="mismatch-detect", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run a Monte Carlo WER sweep and emit CSV")
    sweep.add_argument("--config", help="JSON file with SweepConfig fields; CLI flags win")
    sweep.add_argument("--q", type=int)
    sweep.add_argument("--n", type=int)
    sweep.add_argument("--detector")
    sweep.add_argument("--channel", choices=("ideal", "per-level", "linear"))
    sweep.add_argument("--sigma-b", type=float, dest="sigma_b")
    sweep.add_argument("--a", type=float)
    sweep.add_argument("--b", type=float)
    sweep.add_argument("--constrained", action="store_const", const=True, default=None,
                       help="restrict source words to the Pearson codebook")
    sweep.add_argument("--snr", help="grid as START:STOP:STEP (inclusive) or a single value")
    sweep.add_argument("--trials", type=int)
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--offsets-per", choices=("word", "sweep"), dest="offsets_per")
    sweep.add_argument("--stop-on-errors", type=int, dest="stop_on_error_count",
                       help="optionally stop a point after this many word errors")
    sweep.add_argument("--snr-ref", choices=("unit", "gain"), dest="snr_ref",
                       help="sigma = 10^(-snr/20), or scaled by the gain a")
    sweep.add_argument("--max-iter", type=int, dest="max_iter")
    sweep.add_argument("--threads", type=int)
    sweep.add_argument("--out", help="output CSV path (default: stdout)")

    bound = sub.add_parser("bound", help="tabulate the FTD word-error upper bound")
    bound.add_argument("--q", type=int, required=True)
    bound.add_argument("--n", type=int, required=True)
    bound.add_argument("--snr", required=True)

    book = sub.add_parser("codebook", help="Pearson codebook counts and checks")
    book.add_argument("--n", type=int, required=True)
    book.add_argument("--q", type=int, required=True)
    book.add_argument("--enumerate", action="store_true", dest="do_enumerate")
    book.add_argument("--verify-ab", action="store_true", dest="verify_ab")

    trace = sub.add_parser("trace", help="trace k-means iterations on one received word")
    trace.add_argument("--q", type=int, required=True)
    trace.add_argument("--received", required=True, help="comma-separated channel outputs")
    trace.add_argument("--detector", default="kmeans-nominal",
                       choices=sorted(KMEANS_VARIANTS))
    trace.add_argument("--max-iter", type=int, default=50, dest="max_iter")
    return parser


def _cmd_sweep(args: argparse.Namespace) -> int:
    fields: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg = SweepConfig.from_json(fh.read())
        fields = {name: getattr(cfg, name) for name in SweepConfig.__dataclass_fields__}
    for name in ("q", "n", "detector", "channel", "sigma_b", "a", "b", "constrained",
                 "trials", "seed", "offsets_per", "stop_on_error_count", "snr_ref",
                 "max_iter"):
        value = getattr(args, name)
        if value is not None:
            fields[name] = value
    if args.snr is not None:
        fields["snr_start"], fields["snr_stop"], fields["snr_step"] = _parse_snr(args.snr)
    missing = [k for k in ("q", "n", "detector") if k not in fields]
    if missing:
        raise _UsageError(f"sweep: missing required settings: {', '.join(missing)}")
    try:
        cfg = SweepConfig(**fields)
    except ValueError as exc:
        raise _UsageError(f"sweep: {exc}")
    curve = run_sweep(cfg, threads=args.threads)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_csv(curve, fh)
    else:
        write_csv(curve, sys.stdout)
    return 0


def _cmd_bound(args: argparse.Namespace) -> int:
    start, stop, step = _parse_snr(args.snr)
    grid = [start]
    while grid[-1] + step <= stop + 1e-9:
        grid.append(grid[-1] + step)
    print("snr_db sigma wer_bound")
    for snr in grid:
        sigma = 10.0 ** (-snr / 20.0)
        print(f"{_fmt(snr)} {_fmt(sigma)} {_fmt_wer(wer_upper_bound(args.q, args.n, sigma))}")
    return 0


def _cmd_codebook(args: argparse.Namespace) -> int:
    print(pearson_code_size(args.n, args.q))
    if args.do_enumerate:
        for word in enumerate_code(args.n, args.q):
            print(",".join(str(s) for s in word))
    if args.verify_ab:
        ok = verify_properties_AB(args.n, args.q)
        print(f"properties A and B: {'OK' if ok else 'VIOLATED'}")
        if not ok:
            return 2
    return 0


def _cmd_trace(args: argparse.Namespace) -> int:
    r = _parse_received(args.received)
    if r.size == 0:
        raise _UsageError("trace: --received must contain at least one sample")
    variant = replace(KMEANS_VARIANTS[args.detector], max_iter=args.max_iter)
    history: list = []
    result = kmeans_detect(r, args.q, variant, history=history)
    for step in history:
        cent = " ".join(_fmt(v) for v in step["centroids"])
        th = " ".join(_fmt(v) for v in step["thresholds"])
        asg = " ".join(str(int(s)) for s in step["assignment"])
        print(f"pass {step['pass']}: centroids=[{cent}] thresholds=[{th}] "
              f"assignment=[{asg}] wcss={_fmt(step['wcss'])}")
    flags = ",".join(sorted(result.flags)) or "-"
    print(f"decoded={' '.join(str(s) for s in result.decoded)} "
          f"iterations={result.iterations} converged={result.converged} flags={flags}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "bound":
            return _cmd_bound(args)
        if args.command == "codebook":
            return _cmd_codebook(args)
        if args.command == "trace":
            return _cmd_trace(args)
        raise _UsageError(f"unknown command {args.command!r}")
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 0
    except Exception as exc:  # runtime failures: report, exit 2
        print(f"mismatch-detect: error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
