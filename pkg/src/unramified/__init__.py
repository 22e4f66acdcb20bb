"""Exact and Monte Carlo tools for unramified root-count densities over p-adic fields."""

__version__ = "0.1.0"
