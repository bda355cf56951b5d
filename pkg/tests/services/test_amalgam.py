"""Tests for the amalgam module.

This module contains tests for one-point and general amalgamation, decomposition into
one-point steps and joint embedding.
"""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bset_forest.core.ambient_tree import AmbientNode, ChainPreset, ColorChain
from bset_forest.core.bset_core import BSet, is_linear
from bset_forest.data.forest import validate
from bset_forest.data.models import TreeOfBSets
from bset_forest.data.samples import RATIONALS, e2, node, single_path, twin_stars
from bset_forest.services.amalgam import (
    AmalgamCase,
    AmalgamError,
    amalgamate,
    amalgamate_one_point,
    apply_all,
    decompose,
    decompose_steps,
    is_root_drop,
    joint_embed,
    pad_root,
)
from bset_forest.services.extensions import ExtensionKind, ExtensionTag, classify_extension, extend
from bset_forest.services.generators import InstanceBounds, random_triple
from bset_forest.services.morphisms import check, is_strong_substructure

# Test constants
ROOT = node(0)
TERNARY_LOW = ExtensionKind.ternary("d", "b", node(0, (1, 0)), [("a", "a"), ("d", "d"), ("c", "c")])
TERNARY_HIGH = ExtensionKind.ternary("d2", "b", node(0, (2, 0)), [("a", "a"), ("d2", "d2"), ("c", "c")])
STAR_ONE = ExtensionKind.star(node(-1), "h", {"e": "E", "x1": "Y1", "x2": "Y2", "x3": "Y3"})
STAR_TWO = ExtensionKind.star(node(-1), "k", {"e": "F", "x1": "Z1", "x2": "Z2", "x3": "Z3"})
STAR_LOWER = ExtensionKind.star(node(-2), "k", {"e": "F", "x1": "Z1", "x2": "Z2", "x3": "Z3"})
CHILD = node(0, (1, 0))
HALF = node(0, (Fraction(1, 2), 0))
THIRD = node(0, (Fraction(1, 3), 0))
TWO_THIRDS = node(0, (Fraction(2, 3), 0))
FUZZ_BOUNDS = InstanceBounds(max_nodes=4, max_root=9)
FUZZ_TRIPLES = 1000


@pytest.fixture
def abc() -> TreeOfBSets:
    """Fixture providing the single-node path a - b - c."""
    return single_path("a", "b", "c")


def test_leaf_against_dyadic(abc: TreeOfBSets) -> None:
    """Test a leaf at a and a subdivision of a - b amalgamate to one path."""
    e1 = extend(abc, ExtensionKind.leaf("e1", "a"))
    e2_ = extend(abc, ExtensionKind.dyadic("e2", "a", "b"))
    result = amalgamate_one_point(abc, e1, e2_)
    assert result.amalgam.root_bset == BSet.path("e1", "a", "e2", "b", "c")  # noqa: S101
    assert result.case is AmalgamCase.DISJOINT  # noqa: S101
    assert result.commutes(abc, e1, e2_)  # noqa: S101


def test_ternary_pair_needs_auxiliary_branches(abc: TreeOfBSets) -> None:
    """Test two ternary vertices of different colours at b give b five branches."""
    e1, e2_ = extend(abc, TERNARY_LOW), extend(abc, TERNARY_HIGH)
    result = amalgamate_one_point(abc, e1, e2_)
    root = result.amalgam.root_bset
    assert result.case is AmalgamCase.TERNARY_AUXILIARY  # noqa: S101
    assert len(root) == len(abc.root_bset) + 3  # noqa: S101
    assert root.degree("b") == 5  # noqa: S101
    assert check(result.emb1, e1, result.amalgam).ok  # noqa: S101
    assert check(result.emb2, e2_, result.amalgam).ok  # noqa: S101


def test_same_colour_stars_are_identified() -> None:
    """Test two stars at the same node are isomorphic over the base."""
    base = e2()
    e1, e2_ = extend(base, STAR_ONE), extend(base, STAR_TWO)
    result = amalgamate_one_point(base, e1, e2_)
    assert result.case is AmalgamCase.IDENTIFIED  # noqa: S101
    assert result.amalgam == e1  # noqa: S101
    assert result.emb2.phi[node(-1)]["k"] == "h"  # noqa: S101


def _star_over_child(at: AmbientNode, hub: str, prefix: str) -> ExtensionKind:
    return ExtensionKind.star(at, hub, {f"X{i}": f"{prefix}{i}" for i in (1, 2, 3)})


def test_stars_of_distinct_colours_nest() -> None:
    """Test the lower of two stars goes below the other one."""
    base = e2()
    e1, e2_ = extend(base, STAR_ONE), extend(base, STAR_LOWER)
    result = amalgamate_one_point(base, e1, e2_)
    d = result.amalgam
    assert result.case is AmalgamCase.STAR_STAR  # noqa: S101
    assert d.size() == (3, 6)  # noqa: S101
    assert d.root == node(-2)  # noqa: S101
    assert max(d.root_bset.degree(v) for v in d.root_bset.vertices) == 5  # noqa: S101, PLR2004
    assert d.bsets[node(-1)] == e1.bsets[node(-1)]  # noqa: S101
    assert result.commutes(base, e1, e2_)  # noqa: S101


def test_star_against_root_extension() -> None:
    """Test a star below E2 and a leaf on x1 give a star over the grown root."""
    base = e2()
    e1, e2_ = extend(base, STAR_ONE), extend(base, ExtensionKind.leaf("x4", "x1"))
    result = amalgamate_one_point(base, e1, e2_)
    d = result.amalgam
    assert result.case is AmalgamCase.STAR_ROOT  # noqa: S101
    assert d.size() == (3, 6)  # noqa: S101
    assert d.root == node(-1)  # noqa: S101
    assert max(d.bsets[node(-1)].degree(v) for v in d.bsets[node(-1)].vertices) == 5  # noqa: S101, PLR2004
    assert result.commutes(base, e1, e2_)  # noqa: S101


@pytest.mark.parametrize(
    ("first", "second"),
    [
        (ExtensionKind.leaf("d", "c"), ExtensionKind.leaf("d2", "c")),
        (ExtensionKind.dyadic("d", "a", "b"), ExtensionKind.dyadic("d2", "a", "b")),
    ],
)
def test_equal_attachments_are_identified(abc: TreeOfBSets, first: ExtensionKind, second: ExtensionKind) -> None:
    """Test two leaves on c, or two subdivisions of a - b, are one extension."""
    e1, e2_ = extend(abc, first), extend(abc, second)
    result = amalgamate_one_point(abc, e1, e2_)
    assert result.case is AmalgamCase.IDENTIFIED  # noqa: S101
    assert result.amalgam == e1  # noqa: S101
    assert result.amalgam.size() == (1, 4)  # noqa: S101
    assert result.emb2.phi[ROOT]["d2"] == "d"  # noqa: S101


def test_ternary_pair_of_one_colour(abc: TreeOfBSets) -> None:
    """Test two ternary vertices at b of one colour share a linear node of four vertices."""
    other = ExtensionKind.ternary("d2", "b", CHILD, [("d2", "d2"), ("a", "a"), ("c", "c")])
    e1, e2_ = extend(abc, TERNARY_LOW), extend(abc, other)
    result = amalgamate_one_point(abc, e1, e2_)
    d = result.amalgam
    assert result.case is AmalgamCase.TERNARY_SAME_COLOUR  # noqa: S101
    assert d.size() == (2, 5)  # noqa: S101
    assert d.root_bset.degree("b") == 4  # noqa: S101, PLR2004
    assert is_linear(d.bsets[CHILD])  # noqa: S101
    assert len(d.bsets[CHILD]) == 4  # noqa: S101, PLR2004
    assert result.commutes(abc, e1, e2_)  # noqa: S101


def test_ramification_pair_above_e() -> None:
    """Test a leaf and a subdivision in E2's upper node both land in one path."""
    base = e2()
    e1 = extend(base, ExtensionKind.ramification("y1", "e", ExtensionKind.leaf("Y1", "X1")))
    e2_ = extend(base, ExtensionKind.ramification("y2", "e", ExtensionKind.dyadic("Y2", "X1", "X2")))
    result = amalgamate_one_point(base, e1, e2_)
    d = result.amalgam
    assert result.case is AmalgamCase.RAMIFICATION_SHARED  # noqa: S101
    assert d.size() == (2, 6)  # noqa: S101
    assert d.root_bset.degree("e") == 5  # noqa: S101, PLR2004
    assert is_linear(d.bsets[CHILD])  # noqa: S101
    assert len(d.bsets[CHILD]) == 5  # noqa: S101, PLR2004
    assert result.commutes(base, e1, e2_)  # noqa: S101


def test_ramification_pair_of_stars() -> None:
    """Test stars of colours 2/3 and 1/3 under E2's upper node nest in colour order."""
    base = e2()
    e1 = extend(base, ExtensionKind.ramification("y1", "e", _star_over_child(TWO_THIRDS, "H", "P")))
    e2_ = extend(base, ExtensionKind.ramification("y2", "e", _star_over_child(THIRD, "K", "Q")))
    result = amalgamate_one_point(base, e1, e2_)
    d = result.amalgam
    assert result.case is AmalgamCase.RAMIFICATION_STARS  # noqa: S101
    assert d.size() == (4, 6)  # noqa: S101
    assert set(d.nodes) == {ROOT, THIRD, TWO_THIRDS, CHILD}  # noqa: S101
    assert len(d.bsets[THIRD]) == 5  # noqa: S101, PLR2004
    assert d.bsets[TWO_THIRDS] == e1.bsets[TWO_THIRDS]  # noqa: S101
    assert result.commutes(base, e1, e2_)  # noqa: S101


def test_ramification_star_against_leaf() -> None:
    """Test a star under E2's upper node spans the upper node grown by a leaf."""
    base = e2()
    e1 = extend(base, ExtensionKind.ramification("y1", "e", _star_over_child(HALF, "H", "P")))
    e2_ = extend(base, ExtensionKind.ramification("y2", "e", ExtensionKind.leaf("Y2", "X1")))
    result = amalgamate_one_point(base, e1, e2_)
    d = result.amalgam
    assert result.case is AmalgamCase.RAMIFICATION_MIXED  # noqa: S101
    assert d.size() == (3, 6)  # noqa: S101
    assert set(d.nodes) == {ROOT, HALF, CHILD}  # noqa: S101
    assert len(d.bsets[HALF]) == 5  # noqa: S101, PLR2004
    assert d.bsets[CHILD] == e2_.bsets[CHILD]  # noqa: S101
    assert result.commutes(base, e1, e2_)  # noqa: S101


def test_one_point_rejects_larger_extensions(abc: TreeOfBSets) -> None:
    """Test the one-point construction refuses a two-point extension."""
    big = single_path("a", "b", "c", "d", "e")
    with pytest.raises(AmalgamError):
        amalgamate_one_point(abc, big, big)


def test_decompose_leaf_steps() -> None:
    """Test a - b inside a - b - c - d splits into two leaf steps."""
    a, e = single_path("a", "b"), single_path("a", "b", "c", "d")
    steps = decompose_steps(a, e)
    assert [k.tag for k in steps] == [ExtensionTag.LEAF, ExtensionTag.LEAF]  # noqa: S101
    chain = decompose(a, e)
    assert len(chain) == 3  # noqa: S101
    assert chain[-1] == e  # noqa: S101
    for lower, upper in zip(chain, chain[1:], strict=False):
        assert is_strong_substructure(lower, upper)  # noqa: S101


def test_decompose_ternary_step(abc: TreeOfBSets) -> None:
    """Test a single ternary extension is one step."""
    assert decompose_steps(abc, extend(abc, TERNARY_LOW)) == [TERNARY_LOW]  # noqa: S101


def test_decompose_through_star_and_ramification() -> None:
    """Test a star below E2 followed by a new branch at e decomposes step by step."""
    wide = extend(e2(), ExtensionKind.ramification("x4", "e", ExtensionKind.leaf("X4", "X3")))
    grown = extend(wide, ExtensionKind.star(node(-1), "h", {"e": "E", "x1": "Y1", "x2": "Y2", "x3": "Y3", "x4": "Y4"}))
    chain = decompose(e2(), grown)
    assert chain[-1] == grown  # noqa: S101
    assert len(chain) == 3  # noqa: S101


def test_decompose_rejects_non_substructure(abc: TreeOfBSets) -> None:
    """Test decomposition needs a strong substructure."""
    with pytest.raises(AmalgamError):
        decompose_steps(single_path("a", "c", "b"), abc)


def test_decompose_two_points_on_one_edge() -> None:
    """Test outside vertices on one base edge are inserted as subdivisions."""
    a = single_path("v0", "v1")
    e = single_path("v1", "v5", "v3", "v0", "v4", "v2")
    steps = decompose_steps(a, e)
    assert [k.tag for k in steps] == [  # noqa: S101
        ExtensionTag.LEAF,
        ExtensionTag.DYADIC,
        ExtensionTag.DYADIC,
        ExtensionTag.DYADIC,
    ]
    assert [k.vertex for k in steps] == ["v2", "v3", "v4", "v5"]  # noqa: S101
    assert apply_all(a, steps) == e  # noqa: S101


def test_amalgamate_two_points_on_one_edge() -> None:
    """Test the extension with two vertices on the base edge amalgamates with a leaf beyond v1."""
    a = single_path("v0", "v1")
    e1 = single_path("v2", "v4", "v0", "v3", "v5", "v1")
    e2_ = single_path("v0", "v1", "v2")
    result = amalgamate(a, e1, e2_)
    assert result.amalgam.size() == (1, 7)  # noqa: S101
    assert is_linear(result.amalgam.root_bset)  # noqa: S101
    assert result.commutes(a, e1, e2_)  # noqa: S101


def test_amalgamate_trivial(abc: TreeOfBSets) -> None:
    """Test amalgamating the base itself returns the other extension."""
    e = extend(abc, ExtensionKind.leaf("d", "c"))
    result = amalgamate(abc, abc, e)
    assert result.case is AmalgamCase.TRIVIAL  # noqa: S101
    assert result.amalgam == e  # noqa: S101


def test_amalgamate_agrees_with_one_point(abc: TreeOfBSets) -> None:
    """Test the general construction hands one-point pairs to the one-point case."""
    e1 = extend(abc, ExtensionKind.leaf("e1", "a"))
    e2_ = extend(abc, ExtensionKind.dyadic("e2", "a", "b"))
    assert amalgamate(abc, e1, e2_).amalgam == amalgamate_one_point(abc, e1, e2_).amalgam  # noqa: S101


def test_amalgamate_composite() -> None:
    """Test folding two leaf steps into a subdivided edge."""
    a = single_path("a", "b")
    e1 = single_path("a", "b", "c", "d")
    e2_ = single_path("a", "m", "b")
    result = amalgamate(a, e1, e2_)
    assert result.case is AmalgamCase.COMPOSITE  # noqa: S101
    assert result.amalgam.root_bset == BSet.path("a", "m", "b", "c", "d")  # noqa: S101
    assert result.commutes(a, e1, e2_)  # noqa: S101


def test_pad_root_grows_to_three(abc: TreeOfBSets) -> None:
    """Test padding only adds leaves when the root is small."""
    assert len(pad_root(single_path("a")).root_bset) == 3  # noqa: S101
    assert pad_root(abc) == abc  # noqa: S101


def test_joint_embed_sizes() -> None:
    """Test two three-vertex roots sit in a six-vertex double star."""
    a1, a2 = single_path("a", "b", "c"), single_path("p", "q", "r", colour=2)
    joint, m1, m2 = joint_embed(a1, a2)
    assert len(joint.root_bset) == 6  # noqa: S101
    assert joint.root.colour < 0  # noqa: S101
    assert check(m1, a1, joint).ok  # noqa: S101
    assert check(m2, a2, joint).ok  # noqa: S101


def test_joint_embed_self_gives_two_copies() -> None:
    """Test embedding an instance next to itself uses two different cones."""
    a = e2()
    joint, m1, m2 = joint_embed(a, a)
    assert m1.tau[a.root] != m2.tau[a.root]  # noqa: S101
    assert len(joint.nodes) == 2 * len(a.nodes) + 1  # noqa: S101


def test_joint_embed_anchor_first_is_inclusion() -> None:
    """Test anchoring keeps the first instance's nodes and ids."""
    a1, a2 = twin_stars(), e2()
    joint, m1, _ = joint_embed(a1, a2, anchor_first=True)
    assert all(m1.tau[t] == t for t in a1.nodes)  # noqa: S101
    assert is_strong_substructure(a1, joint)  # noqa: S101


def test_joint_embed_rejects_mixed_chains() -> None:
    """Test instances over different chains cannot be joined."""
    omega = ColorChain(ChainPreset.OMEGA_STAR)
    other = TreeOfBSets.single(omega, AmbientNode(omega.colour(-1)), BSet.path("a"))
    with pytest.raises(AmalgamError):
        joint_embed(single_path("a"), other)


def test_is_root_drop() -> None:
    """Test a star extension lowers the root."""
    assert is_root_drop(e2(), extend(e2(), STAR_ONE))  # noqa: S101
    assert not is_root_drop(e2(), e2())  # noqa: S101


@settings(max_examples=FUZZ_TRIPLES)
@given(seed=st.integers(min_value=0, max_value=100_000))
def test_random_triples_amalgamate(seed: int) -> None:
    """Test seeded random triples amalgamate with a commuting square."""
    a, e1, e2_ = random_triple(random.Random(seed), RATIONALS, FUZZ_BOUNDS)
    result = amalgamate(a, e1, e2_)
    assert result.commutes(a, e1, e2_)  # noqa: S101
    assert check(result.emb2, e2_, result.amalgam).ok  # noqa: S101
    assert check(result.emb1, e1, result.amalgam).ok  # noqa: S101
    assert validate(result.amalgam).ok  # noqa: S101


@settings(max_examples=300)
@given(seed=st.integers(min_value=0, max_value=100_000))
def test_random_extensions_decompose_and_recompose(seed: int) -> None:
    """Test every random extension splits into one-point steps that rebuild it."""
    a, e1, _ = random_triple(random.Random(seed), RATIONALS, FUZZ_BOUNDS)
    steps = decompose_steps(a, e1)
    assert len(steps) == len(e1.domain) - len(a.domain)  # noqa: S101
    assert apply_all(a, steps) == e1  # noqa: S101
    chain = decompose(a, e1)
    for lower, upper in zip(chain, chain[1:], strict=False):
        assert extend(lower, classify_extension(lower, upper)) == upper  # noqa: S101
