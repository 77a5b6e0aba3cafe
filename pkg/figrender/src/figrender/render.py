"""Deterministic matplotlib renderer for figure recipes.

``build_figure`` assembles the matplotlib Figure (tests introspect it);
``render`` saves it to a file.  Line roles follow the paper's conventions:
solid colored curves for multimode sources, dashed references for the
single-mode and infinitely squeezed models.  Heatmap panels hatch exactly
the cells whose status column carries the unstable sentinel.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Rectangle

from .recipes import FigureRecipe, RecipeError, Series, load_recipe, sample_data_dir

__all__ = ["build_figure", "render", "render_figure_id", "UNSTABLE_SENTINEL"]

UNSTABLE_SENTINEL = "unstable"
UNSTABLE_HATCH = "////"

_ROLE_STYLE = {
    "multimode": dict(linestyle="-", linewidth=1.6),
    "single-mode": dict(linestyle="--", linewidth=1.4),
    "infinite-squeezing": dict(linestyle="--", linewidth=1.4, color="black"),
    "reference-dashed": dict(linestyle="-.", linewidth=1.2),
}


def _read_table(data_dir: Path, series: Series, context: str) -> dict[str, list[str]]:
    path = data_dir / series.data
    if not path.exists():
        raise RecipeError(f"{context}: data file {path} not found")
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise RecipeError(f"{context}: {path} is empty") from None
        rows = list(reader)
    if not rows:
        raise RecipeError(f"{context}: {path} has a header but no data rows")
    return {name: [row[i] for row in rows] for i, name in enumerate(header)}


def _column(table: dict, name: Optional[str], context: str) -> list[str]:
    if name is None or name not in table:
        raise RecipeError(f"{context}: column {name!r} not in CSV header {sorted(table)}")
    return table[name]


def _numeric(values: list[str]) -> np.ndarray:
    return np.array([float(v) if v != "" else math.nan for v in values])


def _apply_filter(table: dict, series: Series, context: str) -> dict:
    if series.where is None:
        return table
    column, expected = series.where
    values = _column(table, column, context)
    keep = [i for i, v in enumerate(values) if v == expected or _same_number(v, expected)]
    if not keep:
        raise RecipeError(f"{context}: filter {column}:{expected} matches no rows")
    return {name: [vals[i] for i in keep] for name, vals in table.items()}


def _same_number(a: str, b: str) -> bool:
    try:
        return float(a) == float(b)
    except ValueError:
        return False


def _draw_lines(ax, data_dir: Path, recipe: FigureRecipe) -> None:
    for index, series in enumerate(recipe.series):
        context = f"recipe {recipe.figure} series {series.label or index}"
        table = _apply_filter(_read_table(data_dir, series, context), series, context)
        x = _numeric(_column(table, series.x, context))
        y = _numeric(_column(table, series.y, context))
        style = dict(_ROLE_STYLE[series.role])
        ax.plot(x, y, label=series.label or None, **style)
    ax.set_xlabel(recipe.xlabel)
    ax.set_ylabel(recipe.ylabel)
    if recipe.xlim:
        ax.set_xlim(recipe.xlim)
    if recipe.ylim:
        ax.set_ylim(recipe.ylim)
    if any(series.label for series in recipe.series):
        ax.legend(fontsize=8, frameon=False)


def _draw_heatmap(ax, data_dir: Path, series: Series, figure_id: str) -> None:
    context = f"recipe {figure_id} panel {series.label or series.data}"
    table = _read_table(data_dir, series, context)
    x = _numeric(_column(table, series.x, context))
    y = _numeric(_column(table, series.y, context))
    values = _column(table, series.value, context)
    status = _column(table, series.status, context) if series.status else None

    xs = np.unique(x)
    ys = np.unique(y)
    grid = np.full((ys.size, xs.size), np.nan)
    unstable = np.zeros_like(grid, dtype=bool)
    xi = np.searchsorted(xs, x)
    yi = np.searchsorted(ys, y)
    for k in range(len(values)):
        if status is not None and status[k] == UNSTABLE_SENTINEL:
            unstable[yi[k], xi[k]] = True
        elif values[k] != "":
            grid[yi[k], xi[k]] = float(values[k])

    masked = np.ma.masked_invalid(grid)
    dx = (xs[1] - xs[0]) / 2 if xs.size > 1 else 0.5
    dy = (ys[1] - ys[0]) / 2 if ys.size > 1 else 0.5
    extent = (xs[0] - dx, xs[-1] + dx, ys[0] - dy, ys[-1] + dy)
    image = ax.imshow(
        masked, origin="lower", extent=extent, aspect="auto", cmap="viridis",
        interpolation="nearest",
    )
    ax.figure.colorbar(image, ax=ax, shrink=0.85)
    # hatch exactly the unstable sentinel cells
    for row, col in zip(*np.nonzero(unstable)):
        ax.add_patch(
            Rectangle(
                (xs[col] - dx, ys[row] - dy),
                2 * dx,
                2 * dy,
                fill=False,
                hatch=UNSTABLE_HATCH,
                edgecolor="dimgray",
                linewidth=0.0,
            )
        )
    ax.set_title(series.label, fontsize=9)


def build_figure(recipe: FigureRecipe, data_dir: Path):
    """Assemble the matplotlib Figure for a recipe without saving it."""
    data_dir = Path(data_dir)
    if recipe.kind == "lines":
        fig, ax = plt.subplots(figsize=(5.4, 3.6), dpi=150)
        _draw_lines(ax, data_dir, recipe)
        if recipe.title:
            ax.set_title(recipe.title, fontsize=10)
    else:
        panels = len(recipe.series)
        fig, axes = plt.subplots(
            1, panels, figsize=(3.8 * panels, 3.4), dpi=150, squeeze=False
        )
        for ax, series in zip(axes[0], recipe.series):
            _draw_heatmap(ax, data_dir, series, recipe.figure)
            ax.set_xlabel(recipe.xlabel)
            ax.set_ylabel(recipe.ylabel)
        if recipe.title:
            fig.suptitle(recipe.title, fontsize=10)
    fig.tight_layout()
    return fig


def render(recipe: FigureRecipe, data_dir: Path, out_path: Path) -> Path:
    """Render a recipe to an image file; re-rendering is idempotent."""
    fig = build_figure(recipe, data_dir)
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, metadata={"Software": None})
    plt.close(fig)
    return out_path


def render_figure_id(
    figure_id: str,
    data_dir: Optional[Path] = None,
    out_path: Optional[Path] = None,
    recipe_dir: Optional[Path] = None,
) -> Path:
    """Load the recipe for ``figure_id`` and render it (CLI entry point)."""
    recipe = load_recipe(figure_id, recipe_dir)
    data_dir = Path(data_dir) if data_dir else sample_data_dir()
    out_path = Path(out_path) if out_path else Path(f"{figure_id}.png")
    return render(recipe, data_dir, out_path)
