"""Figure rendering for wass1d study CSVs."""

from .render import RenderError, render

__version__ = "0.1.0"
