"""Figure rendering for orderlab sweep and max-degree CSV files."""

from .readers import AggregateRow, InputError, MaxDegData, read_maxdeg, read_sweep_aggregates
from .render import FigureSpec, RenderSummary, render, render_fit

__all__ = [
    "AggregateRow",
    "InputError",
    "MaxDegData",
    "read_maxdeg",
    "read_sweep_aggregates",
    "FigureSpec",
    "RenderSummary",
    "render",
    "render_fit",
]
