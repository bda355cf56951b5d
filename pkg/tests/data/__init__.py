"""Tests for bset-forest data models, forest operations and text formats."""
