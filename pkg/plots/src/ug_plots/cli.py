"""Command-line entry point: ``ug-plots --figure KIND --in CSV --out IMG``."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from ug_plots.render import RENDERERS, FigureJob, SchemaError


@click.command()
@click.option("--figure", "figure_kind", required=True,
              type=click.Choice(sorted(RENDERERS)),
              help="Renderer to apply to the input CSV.")
@click.option("--in", "inputs", multiple=True, required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Input CSV (repeatable; first is the data table).")
@click.option("--out", "output", required=True,
              type=click.Path(dir_okay=False, path_type=Path),
              help="Output image path (extension selects the format).")
@click.option("--state", default=None,
              help="Mass column for --figure heatmap (default pi_HH).")
@click.option("--overlay-sum", type=float, default=None,
              help="Draw the line M_P + M_R = c on heatmaps.")
@click.option("--bins", type=int, default=100, show_default=True,
              help="Bin count over [0, 1] for --figure histogram.")
@click.option("--cmap", default=None, help="Matplotlib colormap name.")
@click.option("--dpi", type=int, default=None, help="Output resolution.")
def main(figure_kind, inputs, output, state, overlay_sum, bins, cmap, dpi):
    """Render a hybrid-ug CSV bundle into a figure image."""
    style = {"bins": bins}
    for key, value in (("state", state), ("overlay_sum", overlay_sum),
                       ("cmap", cmap), ("dpi", dpi)):
        if value is not None:
            style[key] = value
    job = FigureJob(
        figure=figure_kind, inputs=tuple(inputs), output=output, style=style,
    )
    try:
        RENDERERS[figure_kind](job)
    except SchemaError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)


if __name__ == "__main__":
    main()
