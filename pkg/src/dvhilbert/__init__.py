"""Numerical verification of generalized Hilbert operators on weighted Dirichlet spaces."""

__version__ = "0.1.0"
