"""Development script for refreshing fixtures.

Regenerates the sample fixtures, then validates each TOB file through the CLI.
"""

import sys

from bset_forest.main import run
from scripts.utils import build_fixtures


def main() -> None:
    """Rebuild fixtures and validate them with the command line."""
    failed = [path for path in build_fixtures() if path.suffix == ".tob" and run(["validate", str(path)]) != 0]
    if failed:
        sys.exit(1)
