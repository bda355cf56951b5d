"""Trees of B-sets, their text formats and sample instances."""
