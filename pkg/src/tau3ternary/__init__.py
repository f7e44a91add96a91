"""Numerical toolkit for sums of tau3 over ternary quadratic forms."""

__version__ = "0.1.0"
