"""Figure recipes: flat text files describing which CSV columns to draw how.

A recipe is a ``key = value`` file with one ``series`` line per curve or
heatmap panel.  Series values are ``|``-separated: the CSV file name first,
then ``key=value`` fields (``x``, ``y`` or ``value``, ``role``, ``label``,
optional ``where=column:value`` row filter, optional ``axis`` for secondary
panels).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional


class RecipeError(ValueError):
    """Raised for unreadable or inconsistent recipe files."""


ROLES = ("multimode", "single-mode", "infinite-squeezing", "reference-dashed")
KINDS = ("lines", "heatmap")


@dataclass(frozen=True)
class Series:
    """One curve (lines) or one panel (heatmap) of a figure."""

    data: str
    x: str
    y: Optional[str] = None
    value: Optional[str] = None
    status: Optional[str] = None
    role: str = "multimode"
    label: str = ""
    where: Optional[tuple[str, str]] = None
    axis: int = 0


@dataclass(frozen=True)
class FigureRecipe:
    figure: str
    kind: str
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    xlim: Optional[tuple[float, float]] = None
    ylim: Optional[tuple[float, float]] = None
    series: tuple[Series, ...] = field(default_factory=tuple)


def _parse_range(text: str, context: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise RecipeError(f"{context}: range must be LO:HI, got {text!r}")
    return float(parts[0]), float(parts[1])


def _parse_series(value: str, context: str) -> Series:
    chunks = [chunk.strip() for chunk in value.split("|")]
    if not chunks or not chunks[0]:
        raise RecipeError(f"{context}: series needs a data file")
    fields: dict = {"data": chunks[0]}
    for chunk in chunks[1:]:
        if "=" not in chunk:
            raise RecipeError(f"{context}: expected key=value in series, got {chunk!r}")
        key, _, val = chunk.partition("=")
        key, val = key.strip(), val.strip()
        if key == "where":
            column, _, expected = val.partition(":")
            fields["where"] = (column.strip(), expected.strip())
        elif key == "axis":
            fields["axis"] = int(val)
        elif key in ("x", "y", "value", "status", "role", "label"):
            fields[key] = val
        else:
            raise RecipeError(f"{context}: unknown series field {key!r}")
    if "x" not in fields:
        raise RecipeError(f"{context}: series needs an x column")
    if fields.get("role", "multimode") not in ROLES:
        raise RecipeError(f"{context}: unknown role {fields.get('role')!r}")
    return Series(**fields)


def parse_recipe(text: str, name: str = "<recipe>") -> FigureRecipe:
    """Parse recipe text into a FigureRecipe."""
    values: dict = {}
    series: list[Series] = []
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise RecipeError(f"{name}:{number}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        context = f"{name}:{number}"
        if key == "series":
            series.append(_parse_series(value, context))
        elif key in ("figure", "kind", "title", "xlabel", "ylabel"):
            values[key] = value
        elif key in ("xlim", "ylim"):
            values[key] = _parse_range(value, context)
        else:
            raise RecipeError(f"{context}: unknown key {key!r}")
    if "figure" not in values:
        raise RecipeError(f"{name}: missing 'figure' id")
    values.setdefault("kind", "lines")
    if values["kind"] not in KINDS:
        raise RecipeError(f"{name}: kind must be one of {KINDS}")
    if not series:
        raise RecipeError(f"{name}: recipe has no series")
    for entry in series:
        if values["kind"] == "lines" and entry.y is None:
            raise RecipeError(f"{name}: lines series {entry.label!r} needs a y column")
        if values["kind"] == "heatmap" and entry.value is None:
            raise RecipeError(f"{name}: heatmap series {entry.label!r} needs a value column")
    return FigureRecipe(series=tuple(series), **values)


def recipe_dir() -> Path:
    """Directory of the packaged recipe files."""
    return Path(resources.files("figrender") / "recipes")


def sample_data_dir() -> Path:
    """Directory of the packaged sample CSV datasets."""
    return Path(resources.files("figrender") / "sample_data")


def available_figures(directory: Optional[Path] = None) -> list[str]:
    directory = directory or recipe_dir()
    return sorted(path.stem for path in directory.glob("*.recipe"))


def load_recipe(figure_id: str, directory: Optional[Path] = None) -> FigureRecipe:
    """Load the recipe for ``figure_id`` from ``directory`` (default: packaged)."""
    directory = directory or recipe_dir()
    path = directory / f"{figure_id}.recipe"
    if not path.exists():
        known = ", ".join(available_figures(directory)) or "none"
        raise RecipeError(f"no recipe for {figure_id!r} in {directory} (available: {known})")
    recipe = parse_recipe(path.read_text(encoding="utf-8"), name=str(path))
    if recipe.figure != figure_id:
        raise RecipeError(f"{path}: recipe declares figure {recipe.figure!r}")
    return recipe
