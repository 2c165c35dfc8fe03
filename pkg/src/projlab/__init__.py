"""projlab: projections of discrete planar sets, dense/discrete/exceptional directions."""

__version__ = "0.1.0"
