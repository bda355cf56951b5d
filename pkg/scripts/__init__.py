"""Build and development scripts for bset-forest."""
