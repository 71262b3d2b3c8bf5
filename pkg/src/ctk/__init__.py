"""Contour toolkit for long-range Ising models with decaying fields."""

__version__ = "0.1.0"
