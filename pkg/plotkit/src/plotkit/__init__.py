"""Figure toolkit for routegame sweep CSVs."""

from .grids import SchemaError, SweepGrid, load_sweep
from .render import FigureKind, PlotSpec, RenderInfo, render

__all__ = [
    "FigureKind",
    "PlotSpec",
    "RenderInfo",
    "SchemaError",
    "SweepGrid",
    "load_sweep",
    "render",
]
