"""Tests for the forest module.

This module contains tests for validation, composite maps, classes, the L-relation and its
witness nodes.
"""

import itertools
import random

import pytest

from bset_forest.core.ambient_tree import node_leq
from bset_forest.core.bset_core import BSet
from bset_forest.data.forest import (
    branch_label,
    chain_between,
    class_of,
    class_partition,
    compute_l,
    g_composite,
    pre_branch,
    pre_branches,
    pre_set,
    require_valid,
    restrict_above,
    validate,
    witness_node,
    witness_scan,
)
from bset_forest.data.models import ForestError, LSet, TreeOfBSets
from bset_forest.data.samples import RATIONALS, deep_star, e2, node, single_path, twin_stars
from bset_forest.services.generators import InstanceBounds, random_instance

# Test constants
ROOT = node(0)
CHILD = node(0, (1, 0))
RANDOM_INSTANCES = 500
SAMPLES = (e2, twin_stars, deep_star)
E2_L = LSet.build(
    {"e", "x1", "x2", "x3"},
    {
        ("e", "x1", "x2"),
        ("e", "x2", "x1"),
        ("e", "x1", "x3"),
        ("e", "x3", "x1"),
        ("e", "x2", "x3"),
        ("e", "x3", "x2"),
        ("x2", "x1", "x3"),
        ("x2", "x3", "x1"),
    },
)


@pytest.fixture(scope="module")
def random_instances() -> list[TreeOfBSets]:
    """Fixture providing seeded random valid instances."""
    rng = random.Random(11)
    bounds = InstanceBounds(max_nodes=5, max_root=10)
    return [random_instance(rng, RATIONALS, bounds) for _ in range(RANDOM_INSTANCES)]


def pushforward(m: LSet, comp: dict[str, str]) -> set[tuple[str, str, str]]:
    """Image of L along a composite map on defined-and-distinct triples."""
    return {
        (comp[x], comp[y], comp[z])
        for x, y, z in m.triples
        if {x, y, z} <= comp.keys() and len({comp[x], comp[y], comp[z]}) == 3  # noqa: PLR2004
    }


def test_validate_examples() -> None:
    """Test a path passes, a lone star fails and E2 passes."""
    assert validate(single_path("a", "b")).ok  # noqa: S101
    star = TreeOfBSets.single(RATIONALS, ROOT, BSet.star("e", ["x1", "x2", "x3"]))
    report = validate(star)
    assert not report.ok  # noqa: S101
    assert any("linear" in problem for problem in report.problems)  # noqa: S101
    assert validate(e2()).ok  # noqa: S101
    for sample in SAMPLES:
        assert validate(sample()).ok  # noqa: S101


def test_validate_rejects_non_constant_g() -> None:
    """Test g must collapse each branch to a single vertex."""
    a = twin_stars()
    g = dict(a.g)
    g[(ROOT, CHILD)] = {**g[(ROOT, CHILD)], "d": "A"}
    broken = TreeOfBSets(a.chain, a.bsets, a.f, g)
    assert not validate(broken).ok  # noqa: S101
    with pytest.raises(ForestError):
        require_valid(broken)


def test_validate_rejects_missing_child() -> None:
    """Test every ramification point needs its child node."""
    a = e2()
    lonely = TreeOfBSets(a.chain, {ROOT: a.bsets[ROOT]})
    assert not validate(lonely).ok  # noqa: S101


def test_g_composite_examples() -> None:
    """Test the identity at a node and the E2 map below its child."""
    a = e2()
    assert g_composite(a, ROOT, ROOT) == {v: v for v in a.domain}  # noqa: S101
    comp = g_composite(a, ROOT, CHILD)
    assert comp["x1"] == "X1"  # noqa: S101
    assert "e" not in comp  # noqa: S101


def test_g_composite_is_associative() -> None:
    """Test the composite along three levels equals composing the steps."""
    a = deep_star()
    top = node(0, (1, 0), (2, 0))
    low, high = g_composite(a, ROOT, CHILD), g_composite(a, CHILD, top)
    expected = {x: high[y] for x, y in low.items() if y in high}
    assert g_composite(a, ROOT, top) == expected  # noqa: S101
    assert chain_between(a, ROOT, top) == [ROOT, CHILD, top]  # noqa: S101


def test_class_of_examples() -> None:
    """Test root singletons, E2 classes at the child and the undefined centre."""
    a = e2()
    assert class_of(a, "x1", ROOT) == frozenset({"x1"})  # noqa: S101
    assert class_of(a, "x1", CHILD) == frozenset({"x1"})  # noqa: S101
    assert class_of(a, "e", CHILD) is None  # noqa: S101
    with pytest.raises(ForestError):
        class_of(a, "nope", ROOT)


def test_restrict_above_examples() -> None:
    """Test restriction at the root and above the E2 child."""
    a = e2()
    assert restrict_above(a, ROOT) == a  # noqa: S101
    upper = restrict_above(a, CHILD)
    assert upper == TreeOfBSets.single(RATIONALS, CHILD, BSet.path("X1", "X2", "X3"))  # noqa: S101


def test_l_of_restriction_is_pushforward() -> None:
    """Test L above a node is the image of L along the composite map."""
    for sample in SAMPLES:
        a = sample()
        m = compute_l(a)
        for t in a.nodes:
            upper = compute_l(restrict_above(a, t))
            assert set(upper.triples) == pushforward(m, g_composite(a, a.root, t))  # noqa: S101


def test_compute_l_examples() -> None:
    """Test L on short paths and the E2 instance."""
    assert compute_l(single_path("a", "b", "c")).triples == {("b", "a", "c"), ("b", "c", "a")}  # noqa: S101
    assert compute_l(e2()) == E2_L  # noqa: S101
    assert compute_l(single_path("a", "b")).triples == frozenset()  # noqa: S101


def test_compute_l_rejects_invalid_instance() -> None:
    """Test L is refused on a lone star, whose leaf node is not linear."""
    lone = TreeOfBSets.single(RATIONALS, ROOT, BSet.star("h", ["x1", "x2", "x3"]))
    with pytest.raises(ForestError):
        compute_l(lone)


def test_witness_node_examples() -> None:
    """Test witnesses of E2 triples and a refusal for a non-L triple."""
    a = e2()
    assert witness_node(a, "e", "x1", "x2") == ROOT  # noqa: S101
    assert witness_node(a, "x2", "x1", "x3") == CHILD  # noqa: S101
    with pytest.raises(ForestError):
        witness_node(a, "x1", "x2", "x3")


def test_witness_is_unique(random_instances: list[TreeOfBSets]) -> None:
    """Test every L-triple has exactly one witness and the climb finds it."""
    for a in [*random_instances, *(sample() for sample in SAMPLES)]:
        m = compute_l(a)
        for x, y, z in m.triples:
            found = witness_scan(a, x, y, z)
            assert len(found) == 1  # noqa: S101
            assert witness_node(a, x, y, z) == found[0]  # noqa: S101


def test_every_triple_has_one_orientation(random_instances: list[TreeOfBSets]) -> None:
    """Test each unordered triple of distinct points has exactly one L-middle."""
    for a in random_instances:
        m = compute_l(a)
        for x, y, z in itertools.combinations(sorted(a.domain), 3):
            middles = [p for p, q, r in ((x, y, z), (y, x, z), (z, x, y)) if (p, q, r) in m]
            assert len(middles) == 1  # noqa: S101


def test_pre_sets_and_partitions() -> None:
    """Test pre-sets and class partitions of E2."""
    a = e2()
    assert pre_set(a, ROOT) == frozenset({"e", "x1", "x2", "x3"})  # noqa: S101
    assert pre_set(a, CHILD) == frozenset({"x1", "x2", "x3"})  # noqa: S101
    assert class_partition(a, CHILD) == [frozenset({"x1"}), frozenset({"x2"}), frozenset({"x3"})]  # noqa: S101


def test_classes_nest_upward(random_instances: list[TreeOfBSets]) -> None:
    """Test pre-sets shrink and classes grow as nodes rise."""
    for a in random_instances:
        for s, t in itertools.permutations(a.nodes, 2):
            if not node_leq(s, t):
                continue
            assert pre_set(a, t) <= pre_set(a, s)  # noqa: S101
            for x in pre_set(a, t):
                assert class_of(a, x, s) <= class_of(a, x, t)  # noqa: S101


def test_pre_branches() -> None:
    """Test pre-branches at the E2 centre are the leaf singletons."""
    a = e2()
    assert pre_branches(a, ROOT, "e") == [frozenset({"x1"}), frozenset({"x2"}), frozenset({"x3"})]  # noqa: S101
    assert pre_branch(a, CHILD, "X2", 1) == frozenset({"x3"})  # noqa: S101
    with pytest.raises(ForestError):
        pre_branch(a, CHILD, "X2", 2)


def test_branch_label() -> None:
    """Test branch labels follow the g map on twin stars."""
    a = twin_stars()
    assert branch_label(a, ROOT, CHILD, "d") == "V"  # noqa: S101
    assert branch_label(a, ROOT, CHILD, "a") == "A"  # noqa: S101
