"""Figure rendering for mismatch-detect sweep CSVs."""

from .render import FigureSpec, render_iteration_histogram, render_wer_figure

__version__ = "0.1.0"
