"""Chaotic bifurcation-parameter keying workbench."""

__version__ = "0.1.0"
