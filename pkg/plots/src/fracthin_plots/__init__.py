"""Figures for fracthin run artifacts, consuming only the documented formats."""

from .figures import (
    FIGURE_KINDS,
    FigureSpec,
    plot_dissipation,
    plot_propagation,
    plot_snapshots,
    plot_sweep,
    render,
)
from .io import SchemaError, read_run_csv, read_snapshot, read_sweep

__version__ = "0.1.0"
