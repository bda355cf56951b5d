"""Test suite for bset-forest."""
