"""Tests for the utility helpers."""
