"""Command line interface: ``figrender <figure-id> --data DIR --out PATH``."""

from __future__ import annotations

import sys

import click

from .recipes import RecipeError, available_figures
from .render import render_figure_id


@click.command()
@click.argument("figure_id", required=False)
@click.option("--data", "data_dir", type=click.Path(exists=True, file_okay=False),
              help="Directory with the CSV datasets (default: shipped samples).")
@click.option("--out", "out_path", type=click.Path(dir_okay=False),
              help="Output image path (default: <figure-id>.png).")
@click.option("--recipes", "recipe_path", type=click.Path(exists=True, file_okay=False),
              help="Directory with recipe files (default: shipped recipes).")
@click.option("--list", "list_only", is_flag=True, help="List available figure ids.")
def main(figure_id, data_dir, out_path, recipe_path, list_only):
    """Render FIGURE_ID from its recipe and CSV data."""
    if list_only or figure_id is None:
        for name in available_figures():
            click.echo(name)
        if figure_id is None and not list_only:
            raise click.UsageError("missing FIGURE_ID (or use --list)")
        return
    try:
        written = render_figure_id(figure_id, data_dir, out_path, recipe_path)
    except RecipeError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(2)
    click.echo(f"wrote {written}")


if __name__ == "__main__":
    main()
