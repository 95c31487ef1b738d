"""Numerical laboratory for weighted oscillation estimates of commutators on 1D grids."""

__version__ = "0.1.0"
