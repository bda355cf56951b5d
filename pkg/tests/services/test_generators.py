"""Tests for the generators module.

This module contains tests for fresh ids, one-point recipe enumeration and the seeded
random instance generators.
"""

import random
from fractions import Fraction

import pytest

from bset_forest.data.forest import validate
from bset_forest.data.models import TreeOfBSets
from bset_forest.data.samples import RATIONALS, single_path
from bset_forest.services.extensions import ExtensionKind, ExtensionTag
from bset_forest.services.generators import (
    InstanceBounds,
    next_id,
    one_point_extensions,
    one_point_kinds,
    random_instance,
    random_triple,
    seed_instance,
)
from bset_forest.services.morphisms import is_strong_substructure

# Test constants
COLOURS = (Fraction(0), Fraction(1))
SMALL = InstanceBounds(max_nodes=3, max_root=6)


@pytest.fixture
def path3() -> TreeOfBSets:
    """Fixture providing the single-node path v0 - v1 - v2 at colour 0."""
    return single_path("v0", "v1", "v2")


def test_next_id() -> None:
    """Test the first free v-id is returned."""
    assert next_id(["v0", "v1"]) == "v2"  # noqa: S101
    assert next_id(["v1"]) == "v0"  # noqa: S101
    assert next_id([]) == "v0"  # noqa: S101


def test_seed_instance() -> None:
    """Test the seed is one node carrying one vertex."""
    seed = seed_instance(RATIONALS, Fraction(1))
    assert seed.size() == (1, 1)  # noqa: S101
    assert seed.root.colour == Fraction(1)  # noqa: S101
    assert validate(seed).ok  # noqa: S101


def test_single_vertex_has_only_a_leaf() -> None:
    """Test a lone vertex can only grow a leaf."""
    assert one_point_kinds(single_path("v0"), COLOURS) == [ExtensionKind.leaf("v1", "v0")]  # noqa: S101


def test_path_kinds(path3: TreeOfBSets) -> None:
    """Test the recipes over a three-vertex path."""
    kinds = one_point_kinds(path3, COLOURS)
    tags = [kind.tag for kind in kinds]
    assert tags.count(ExtensionTag.LEAF) == 2  # noqa: S101, PLR2004
    assert tags.count(ExtensionTag.DYADIC) == 2  # noqa: S101, PLR2004
    # one colour above the root, three placements of the new vertex
    assert tags.count(ExtensionTag.TERNARY) == 3  # noqa: S101, PLR2004
    assert ExtensionTag.STAR not in tags  # noqa: S101


def test_stars_need_colours_below(path3: TreeOfBSets) -> None:
    """Test star recipes appear only for colours below the root."""
    kinds = one_point_kinds(path3, (Fraction(-1), *COLOURS))
    stars = [kind for kind in kinds if kind.tag is ExtensionTag.STAR]
    assert len(stars) == 1  # noqa: S101
    assert stars[0].node.colour == Fraction(-1)  # noqa: S101
    assert not any(k.tag is ExtensionTag.STAR for k in one_point_kinds(path3, (Fraction(-1),), stars=False))  # noqa: S101


def test_extensions_are_strong(path3: TreeOfBSets) -> None:
    """Test every enumerated extension contains the base strongly."""
    extensions = one_point_extensions(path3, COLOURS, SMALL)
    assert extensions  # noqa: S101
    for e in extensions:
        assert len(e.domain) == len(path3.domain) + 1  # noqa: S101
        assert is_strong_substructure(path3, e)  # noqa: S101


def test_random_instance_is_deterministic() -> None:
    """Test the same seed gives the same instance."""
    first = random_instance(random.Random(5), RATIONALS, SMALL)
    second = random_instance(random.Random(5), RATIONALS, SMALL)
    assert first == second  # noqa: S101


@pytest.mark.parametrize("seed", range(8))
def test_random_instance_within_bounds(seed: int) -> None:
    """Test random instances are valid and respect the bounds."""
    a = random_instance(random.Random(seed), RATIONALS, SMALL)
    assert validate(a).ok  # noqa: S101
    assert SMALL.admits(a)  # noqa: S101


@pytest.mark.parametrize("seed", range(6))
def test_random_triple_gives_strong_extensions(seed: int) -> None:
    """Test both members of a random triple extend the base strongly."""
    a, e1, e2 = random_triple(random.Random(seed), RATIONALS, SMALL)
    assert is_strong_substructure(a, e1)  # noqa: S101
    assert is_strong_substructure(a, e2)  # noqa: S101
