"""Offline figure scripts over the pointer-therm CSV contracts."""

from .csvio import PlotInputError, Table, read_table
from .figures import FIGURE_KINDS, FigureSpec, render
from .markers import reference_markers

__version__ = "0.1.0"

__all__ = ["PlotInputError", "Table", "read_table", "FIGURE_KINDS",
           "FigureSpec", "render", "reference_markers", "__version__"]
