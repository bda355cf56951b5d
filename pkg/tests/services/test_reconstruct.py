"""Tests for the reconstruct module.

This module contains tests for rebuilding the shape of a tree of B-sets from its
L-relation, aligning the result with the original, and the class-separation criterion.
"""

import random
from collections.abc import Callable
from pathlib import Path

import pytest

from bset_forest.core.bset_core import BSet
from bset_forest.data.forest import compute_l
from bset_forest.data.models import LSet, TreeOfBSets
from bset_forest.data.samples import RATIONALS, deep_star, e2, node, single_path, twin_stars
from bset_forest.data.serialization import load_lset
from bset_forest.services.generators import InstanceBounds, random_instance
from bset_forest.services.reconstruct import (
    AbstractForest,
    ReconstructError,
    align,
    dump_forest,
    order_criterion,
    positive_type_relations_inside,
    quotient_l,
    recover_tree,
    root_adjacency,
    validate_shape,
)

# Test constants
FIXTURE_DIR = Path(__file__).parent.parent / "fixtures"
STAR = BSet.star("e", ["x1", "x2", "x3"])
ALIGN_INSTANCES = 100
ORACLE_INSTANCES = 30
# adjacency would be the 4-cycle a - b - c - d - a
CYCLIC_L = LSet.build(
    "abcd",
    [
        ("b", "a", "c"), ("b", "c", "a"),
        ("c", "b", "d"), ("c", "d", "b"),
        ("d", "a", "c"), ("d", "c", "a"),
        ("a", "b", "d"), ("a", "d", "b"),
    ],
)


@pytest.fixture
def e2_l() -> LSet:
    """Fixture providing the L-relation of E2, read from the shipped fixture."""
    return load_lset((FIXTURE_DIR / "e2.lset").read_text(encoding="utf-8"))


def test_root_adjacency_of_path() -> None:
    """Test the L-relation of a path gives back the path."""
    assert root_adjacency(compute_l(single_path("a", "b", "c"))) == BSet.path("a", "b", "c")  # noqa: S101


def test_root_adjacency_of_e2(e2_l: LSet) -> None:
    """Test E2's L-relation gives the star at e."""
    assert root_adjacency(e2_l) == STAR  # noqa: S101


def test_root_adjacency_of_two_points() -> None:
    """Test two points with no triples are adjacent."""
    assert root_adjacency(LSet.build("ab", [])) == BSet.path("a", "b")  # noqa: S101


def test_root_adjacency_rejects_cycles() -> None:
    """Test an adjacency with a cycle is not a root B-set."""
    with pytest.raises(ReconstructError):
        root_adjacency(CYCLIC_L)
    with pytest.raises(ReconstructError):
        recover_tree(CYCLIC_L)


def test_quotient_at_hub(e2_l: LSet) -> None:
    """Test projecting onto the branches at e keeps only the middle branch between the others."""
    quotient = quotient_l(e2_l, "e")
    assert quotient.domain == frozenset({"x1", "x2", "x3"})  # noqa: S101
    assert quotient.triples == frozenset({("x2", "x1", "x3"), ("x2", "x3", "x1")})  # noqa: S101


def test_quotient_needs_ramification() -> None:
    """Test a path has no point to project at."""
    with pytest.raises(ReconstructError):
        quotient_l(compute_l(single_path("a", "b", "c")), "b")


def test_recover_e2(e2_l: LSet) -> None:
    """Test E2 comes back as a star below a linear node of size three."""
    forest = recover_tree(e2_l)
    assert len(forest.bsets) == 2  # noqa: S101, PLR2004
    assert forest.root_bset == STAR  # noqa: S101
    assert forest.children("n0") == ["n0.1"]  # noqa: S101
    assert forest.bsets["n0.1"] == BSet.path("x1", "x2", "x3")  # noqa: S101
    assert validate_shape(forest).ok  # noqa: S101


def test_recover_single_node() -> None:
    """Test a path's L-relation rebuilds one node carrying the path."""
    forest = recover_tree(compute_l(single_path("a", "b", "c", "d")))
    assert list(forest.bsets) == ["n0"]  # noqa: S101
    assert forest.root_bset == BSet.path("a", "b", "c", "d")  # noqa: S101


@pytest.mark.parametrize("sample", [e2, twin_stars, deep_star])
def test_recovered_shape_aligns(sample: Callable[[], TreeOfBSets]) -> None:
    """Test every sample aligns with the forest rebuilt from its L-relation."""
    a = sample()
    forest = recover_tree(compute_l(a))
    iso = align(a, forest)
    assert iso is not None  # noqa: S101
    assert set(iso.nodes.values()) == set(forest.bsets)  # noqa: S101


def test_random_instances_align_with_their_rebuilt_shape() -> None:
    """Test seeded random instances align with the forest rebuilt from L."""
    rng = random.Random(17)
    bounds = InstanceBounds(max_nodes=5, max_root=7)
    for _ in range(ALIGN_INSTANCES):
        a = random_instance(rng, RATIONALS, bounds)
        forest = recover_tree(compute_l(a))
        assert validate_shape(forest).ok  # noqa: S101
        iso = align(a, forest)
        assert iso is not None  # noqa: S101
        assert set(iso.nodes.values()) == set(forest.bsets)  # noqa: S101


def test_align_needs_matching_shape() -> None:
    """Test E2 does not align with a single-node forest."""
    flat = AbstractForest({"n0": STAR}, {"n0": None})
    assert align(e2(), flat) is None  # noqa: S101


def test_validate_shape_flags_bad_leaf() -> None:
    """Test a leaf node carrying a star is reported."""
    report = validate_shape(AbstractForest({"n0": STAR}, {"n0": None}))
    assert not report.ok  # noqa: S101


def test_order_criterion_on_e2() -> None:
    """Test the criterion matches the order on E2's chain."""
    a = e2()
    root, child = node(0), node(0, (1, 0))
    assert order_criterion(a, root, child).criterion  # noqa: S101
    assert order_criterion(a, root, child).agrees  # noqa: S101
    assert order_criterion(a, child, child).agrees  # noqa: S101
    reverse = order_criterion(a, child, root)
    assert not reverse.criterion  # noqa: S101
    assert reverse.agrees  # noqa: S101


def test_order_criterion_on_siblings() -> None:
    """Test incomparable siblings are separated by the criterion."""
    a = twin_stars()
    left, right = node(0, (1, 0)), node(0, (1, 1))
    report = order_criterion(a, left, right)
    assert not report.actual  # noqa: S101
    assert report.agrees  # noqa: S101


def test_positive_type_relations_inside_e2(e2_l: LSet) -> None:
    """Test the star is the only tree whose betweenness lies inside E2's L-relation."""
    assert positive_type_relations_inside(e2_l) == [STAR]  # noqa: S101


def test_root_tree_is_the_only_one_inside_l() -> None:
    """Test on random instances the root tree is the single tree whose betweenness fits L."""
    rng = random.Random(23)
    bounds = InstanceBounds(max_nodes=4, max_root=6)
    for _ in range(ORACLE_INSTANCES):
        a = random_instance(rng, RATIONALS, bounds)
        m = compute_l(a)
        assert positive_type_relations_inside(m) == [root_adjacency(m)]  # noqa: S101
        assert root_adjacency(m) == a.root_bset  # noqa: S101


def test_dump_forest(e2_l: LSet) -> None:
    """Test the forest text lists both nodes with their maps."""
    text = dump_forest(recover_tree(e2_l))
    lines = text.splitlines()
    assert lines[0] == "FOREST v1"  # noqa: S101
    assert "node n0 parent -" in lines  # noqa: S101
    assert "node n0.1 parent n0" in lines  # noqa: S101
    assert "f n0.1 -> e" in lines  # noqa: S101
    assert "g n0.1: x1->x1 x2->x2 x3->x3" in lines  # noqa: S101
    assert "edges x1-x2 x2-x3" in lines  # noqa: S101
