"""Utility functions for locating chain output directories."""

import os
import sys
from pathlib import Path

APP_NAME = "bset-forest"
HOME_ENV = "BSET_FOREST_HOME"


def get_app_dir() -> Path:
    """Get the per-user data directory for the current platform.

    Returns:
        Path: The directory where chain members are written by default
    """
    if sys.platform == "win32":
        return Path(os.environ.get("LOCALAPPDATA", Path.home())) / APP_NAME
    if sys.platform == "darwin":
        return Path.home() / "Library" / "Application Support" / APP_NAME
    # Linux and other Unix
    return Path.home() / ".local" / "share" / APP_NAME


def get_output_dir(explicit: str | Path | None = None) -> Path:
    """Resolve where ``chain --emit-all`` writes its members.

    Args:
        explicit: Directory given on the command line, if any

    Returns:
        Path: The explicit directory, else ``$BSET_FOREST_HOME``, else the app directory
    """
    if explicit:
        return Path(explicit)
    env = os.environ.get(HOME_ENV)
    if env:
        return Path(env)
    return get_app_dir() / "chains"


def ensure_output_dir(explicit: str | Path | None = None) -> Path:
    """Create the output directory if it doesn't exist and return it."""
    out = get_output_dir(explicit)
    out.mkdir(parents=True, exist_ok=True)
    return out
