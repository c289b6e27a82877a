"""Singular points of second-order ODEs cubic in the first derivative."""

__version__ = "0.1.0"
