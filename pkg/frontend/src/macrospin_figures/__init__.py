"""Batch renderer turning macrospin CSV/JSON outputs into publication figures."""

__version__ = "0.1.0"

from .render import FIGURE_IDS, FigureSpec, MissingColumnError, NoDataError, render
