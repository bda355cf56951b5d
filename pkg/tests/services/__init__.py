"""Tests for bset-forest services."""
