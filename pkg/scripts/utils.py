"""Shared utility functions for development scripts."""

import logging
from pathlib import Path

from bset_forest.data.forest import compute_l
from bset_forest.data.samples import deep_star, e2, twin_stars
from bset_forest.data.serialization import dump_lset, dump_tob, load_lset, load_tob

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

FIXTURE_DIR = Path(__file__).parent.parent / "tests" / "fixtures"

SAMPLES = {
    "e2": e2,
    "twin_stars": twin_stars,
    "deep_star": deep_star,
}


def build_fixtures(target: Path = FIXTURE_DIR) -> list[Path]:
    """Write a TOB and an LSET fixture for every named sample.

    Returns:
        list[Path]: The files written
    """
    target.mkdir(parents=True, exist_ok=True)
    written = []
    for name, build in SAMPLES.items():
        a = build()
        tob_text = dump_tob(a)
        lset_text = dump_lset(compute_l(a))

        # Both documents must load back to what was dumped
        if load_tob(tob_text) != a or load_lset(lset_text) != compute_l(a):
            msg = f"fixture {name} does not survive a reload"
            raise RuntimeError(msg)

        for suffix, text in ((".tob", tob_text), (".lset", lset_text)):
            path = target / f"{name}{suffix}"
            path.write_text(text, encoding="utf-8")
            written.append(path)
    logger.info("Wrote %d fixture files to %s", len(written), target)
    return written
