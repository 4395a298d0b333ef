"""Graph-coloring pilot allocation for multi-cell massive MIMO."""

__version__ = "0.1.0"
