"""Figure rendering for ptkr simulation output.

Reads the delimited series files written by the ptkr CLI and renders the
publication-style panels: diverged-trajectory onset, second-moment
diffusion with analytic guide lines, OTOC growth with exponential and
power-law guides, wavepacket moments, and momentum/angle distributions.
Guide lines are always computed from the recipe parameters, never fitted
here: fitting belongs to the simulation side.
"""

from ptkr_figures.recipes import FigureRecipe, RecipeError, load_recipe
from ptkr_figures.render import build_figure, render

__version__ = "0.1.0"

__all__ = ["FigureRecipe", "RecipeError", "build_figure", "load_recipe", "render"]
