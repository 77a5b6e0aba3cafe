"""figrender: renders simopo CSV datasets into paper-style figures."""

from .recipes import FigureRecipe, RecipeError, Series, available_figures, load_recipe, parse_recipe
from .render import build_figure, render, render_figure_id

__version__ = "0.1.0"
