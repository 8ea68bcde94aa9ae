"""Offline rendering of bosegas CLI outputs to image files."""

from .render import LOG_FLOOR, PINNED_STYLE, SCHEMAS, PlotJob, SchemaError, Table, read_table, render

__version__ = "0.1.0"

__all__ = ["LOG_FLOOR", "PINNED_STYLE", "SCHEMAS", "PlotJob", "SchemaError",
           "Table", "read_table", "render", "__version__"]
