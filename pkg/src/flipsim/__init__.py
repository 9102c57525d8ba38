"""Cycle-level model of a data-centric CGRA for graph processing, with its mapping compiler."""

__version__ = "0.1.0"
