"""grwlab: numerics for maximal spacelike graphs in warped-product spacetimes."""

__version__ = "0.1.0"
