"""Numerical laboratory for boundary Liouville constants and SLE bubble Monte Carlo."""

__version__ = "0.1.0"
