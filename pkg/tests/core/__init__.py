"""Tests for the bset-forest core: ambient tree and B-sets."""
