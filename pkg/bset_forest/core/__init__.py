"""Colour chains, the ambient tree and B-sets."""
