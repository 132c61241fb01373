"""Numerical analysis of x'' + f(t, x/t) = 0."""

__version__ = "0.1.0"
