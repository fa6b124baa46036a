"""Render publication-style figures from fieldrot CSV datasets.

This package contains no physics: every plotted value is read verbatim from
a CSV produced by the fieldrot CLI; recipes only map columns to styles.
"""

from fieldrot_plots.render import (
    FigureRecipe,
    RecipeError,
    load_recipe,
    render_figure,
)

__all__ = ["FigureRecipe", "RecipeError", "load_recipe", "render_figure"]
__version__ = "0.1.0"
