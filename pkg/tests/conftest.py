"""Configuration for pytest."""

from hypothesis import settings

settings.register_profile("bset", deadline=None, database=None)
settings.load_profile("bset")
