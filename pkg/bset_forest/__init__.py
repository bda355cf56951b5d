"""Finite coloured trees of B-sets: construction, L-relations, amalgamation and reconstruction."""

__version__ = "0.1.1"
