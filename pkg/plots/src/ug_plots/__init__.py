"""Downstream figure rendering for hybrid-ug CSV bundles.

Pure file-to-file transforms: every number shown comes straight from the
input CSV; nothing is recomputed.
"""

from ug_plots.render import (
    FigureJob,
    SchemaError,
    plot_heatmap,
    plot_histogram,
    plot_lines,
)

__all__ = [
    "FigureJob",
    "SchemaError",
    "plot_heatmap",
    "plot_histogram",
    "plot_lines",
]

__version__ = "0.1.0"
