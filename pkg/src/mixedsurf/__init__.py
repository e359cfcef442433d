"""Lightlike-point analysis for mixed type surfaces in Minkowski 3-space."""

__version__ = "0.1.0"
