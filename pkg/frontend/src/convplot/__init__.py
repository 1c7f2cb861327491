"""Convergence-figure rendering for experiment sweep CSVs."""

from .render import PlotSpec, RenderError, RenderResult, render_convergence

__version__ = "0.1.0"
