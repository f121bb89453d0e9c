"""Turn sweep CSVs into semilog WER-vs-SNR figures and iteration histograms.

Consumes the fixed CSV schema emitted by the simulator CLI; this package never
imports the simulator itself. Zero-error points are censored estimates and are
drawn at their upper confidence bound with a distinct open marker instead of
being dropped.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__all__ = [
    "FigureSpec",
    "load_rows",
    "select_series",
    "render_wer_figure",
    "render_iteration_histogram",
]

_WER_COLUMNS = ("snr_db", "sigma", "detector", "q", "n", "trials", "errors",
                "wer", "ci_low", "ci_high")
_HIST_COLUMNS = ("hist_t1", "hist_t2", "hist_t3", "hist_t4plus")


@dataclass(frozen=True)
class FigureSpec:
    """What to draw: input CSVs, series filters, labels, bound overlay, output."""

    csv_paths: tuple[str, ...]
    series: tuple[str, ...]
    labels: Optional[tuple[str, ...]] = None
    bound: bool = False
    out: str = "figure.png"

    def __post_init__(self) -> None:
        if not self.csv_paths:
            raise ValueError("need at least one input CSV")
        if not self.series:
            raise ValueError("need at least one series selector (e.g. detector=ftd)")
        if self.labels is not None and len(self.labels) != len(self.series):
            raise ValueError("labels, when given, must match the series one-to-one")


def _require_columns(rows: list[dict], columns: Sequence[str], path: str) -> None:
    have = set(rows[0].keys()) if rows else set()
    for col in columns:
        if col not in have:
            raise ValueError(f"CSV {path} is missing column {col!r} "
                             f"(columns present: {sorted(have)})")


def load_rows(csv_paths: Sequence[str]) -> list[dict]:
    """All data rows from the given CSVs, with the source path attached."""
    rows: list[dict] = []
    for path in csv_paths:
        with open(path, newline="") as fh:
            file_rows = list(csv.DictReader(fh))
        _require_columns(file_rows, _WER_COLUMNS, path)
        for row in file_rows:
            row["_path"] = path
            rows.append(row)
    if not rows:
        raise ValueError(f"no data rows found in {list(csv_paths)}")
    return rows


def _parse_selector(selector: str) -> tuple[str, str]:
    if "=" not in selector:
        raise ValueError(f"bad series selector {selector!r}; expected key=value")
    key, value = selector.split("=", 1)
    return key.strip(), value.strip()


def select_series(rows: list[dict], selector: str) -> list[dict]:
    """Rows matching a key=value filter, sorted by SNR."""
    key, value = _parse_selector(selector)
    if key not in rows[0]:
        raise ValueError(f"CSV is missing column {key!r} used by selector {selector!r}")
    picked = [r for r in rows if r[key] == value]
    if not picked:
        available = sorted({r["detector"] for r in rows})
        raise ValueError(f"selector {selector!r} matches no rows; "
                         f"available detectors: {available}")
    return sorted(picked, key=lambda r: float(r["snr_db"]))


def _q_tail(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def _ftd_bound(q: int, n: int, sigma: float) -> float:
    return (2.0 * (q - 1) / q) * n * _q_tail(1.0 / (2.0 * sigma))


def render_wer_figure(spec: FigureSpec) -> dict:
    """Draw WER versus SNR (log y-axis) for each selected series.

    Returns a small summary: series drawn, censored points, output path.
    """
    rows = load_rows(spec.csv_paths)
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    censored_total = 0
    markers = ["o", "s", "^", "D", "*", "P", "X"]

    for idx, selector in enumerate(spec.series):
        series = select_series(rows, selector)
        label = spec.labels[idx] if spec.labels else selector
        color = f"C{idx % 10}"
        marker = markers[idx % len(markers)]

        snr = [float(r["snr_db"]) for r in series]
        wer = [float(r["wer"]) for r in series]
        lo = [float(r["ci_low"]) for r in series]
        hi = [float(r["ci_high"]) for r in series]

        observed = [(s, w, l, h) for s, w, l, h in zip(snr, wer, lo, hi) if w > 0]
        censored = [(s, h) for s, w, h in zip(snr, wer, hi) if w == 0]
        censored_total += len(censored)

        if observed:
            xs, ys, ls, hs = zip(*observed)
            yerr = [[max(y - l, 0.0) for y, l in zip(ys, ls)],
                    [max(h - y, 0.0) for y, h in zip(ys, hs)]]
            ax.errorbar(xs, ys, yerr=yerr, marker=marker, color=color,
                        capsize=2, label=label)
        if censored:
            xs, hs = zip(*censored)
            ax.plot(xs, hs, linestyle="none", marker="v", markerfacecolor="none",
                    color=color,
                    label=f"{label} (0 errors, CI bound)" if not observed else None)

    if spec.bound:
        first = select_series(rows, spec.series[0])
        q, n = int(first[0]["q"]), int(first[0]["n"])
        xs = [float(r["snr_db"]) for r in first]
        ys = [_ftd_bound(q, n, float(r["sigma"])) for r in first]
        ax.plot(xs, ys, "k--", label="FTD upper bound")

    ax.set_yscale("log")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("WER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(spec.out, dpi=120)
    plt.close(fig)
    return {"out": spec.out, "series": len(spec.series), "censored_points": censored_total}


def render_iteration_histogram(csv_paths: Sequence[str], selector: str, out: str) -> dict:
    """Grouped bar chart of the iteration-tally distribution per SNR point."""
    rows = load_rows(csv_paths)
    _require_columns([rows[0]], _HIST_COLUMNS, csv_paths[0])
    series = select_series(rows, selector)

    snrs = [float(r["snr_db"]) for r in series]
    fracs = []
    for r in series:
        trials = int(r["trials"])
        fracs.append([int(r[c]) / trials for c in _HIST_COLUMNS])

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    width = 0.8 / len(_HIST_COLUMNS)
    positions = range(len(snrs))
    tally_labels = ["1", "2", "3", ">=4"]
    for j, tally in enumerate(tally_labels):
        xs = [p + (j - 1.5) * width for p in positions]
        ax.bar(xs, [f[j] for f in fracs], width=width, label=f"iterations = {tally}")
    ax.set_xticks(list(positions))
    ax.set_xticklabels([f"{s:g}" for s in snrs])
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("fraction of words")
    ax.set_title(selector)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return {"out": out, "points": len(snrs)}
