"""Morphisms, extensions, amalgamation, the chain construction and reconstruction."""
