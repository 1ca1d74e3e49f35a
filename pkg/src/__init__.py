"""Degree splitting, sinkless orientation and edge coloring in the LOCAL model."""

__version__ = "0.1.0"
