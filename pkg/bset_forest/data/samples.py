"""Named worked instances used by the fixtures, the CLI fuzz corpus and the tests."""

from __future__ import annotations

from fractions import Fraction

from bset_forest.core.ambient_tree import AmbientNode, ChainPreset, ColorChain
from bset_forest.core.bset_core import BSet
from bset_forest.data.models import TreeOfBSets

RATIONALS = ColorChain(ChainPreset.RATIONALS)


def node(head: int | Fraction, *tail: tuple[int | Fraction, int]) -> AmbientNode:
    """Build a rational node from ints."""
    return AmbientNode(Fraction(head), tuple((Fraction(c), n) for c, n in tail))


def single_path(*ids: str, colour: int = 0, chain: ColorChain = RATIONALS) -> TreeOfBSets:
    """One node carrying the path on ids, in order."""
    return TreeOfBSets.single(chain, AmbientNode(chain.colour(colour)), BSet.path(*ids))


def e2() -> TreeOfBSets:
    """Root star on e with leaves x1, x2, x3; above e a path X1 - X2 - X3."""
    root, child = node(0), node(0, (1, 0))
    return TreeOfBSets(
        RATIONALS,
        {
            root: BSet.star("e", ["x1", "x2", "x3"]),
            child: BSet.path("X1", "X2", "X3"),
        },
        {root: {child: "e"}},
        {(root, child): {"x1": "X1", "x2": "X2", "x3": "X3"}},
    )


def e2_recoloured(colour: int = 2) -> TreeOfBSets:
    """E2 with its upper node moved to another colour."""
    root, child = node(0), node(0, (colour, 0))
    return TreeOfBSets(
        RATIONALS,
        {root: BSet.star("e", ["x1", "x2", "x3"]), child: BSet.path("X1", "X2", "X3")},
        {root: {child: "e"}},
        {(root, child): {"x1": "X1", "x2": "X2", "x3": "X3"}},
    )


def twin_stars() -> TreeOfBSets:
    """Root u - v with leaves a, b on u and c, d on v; a linear node above each of u and v."""
    root, left, right = node(0), node(0, (1, 0)), node(0, (1, 1))
    return TreeOfBSets(
        RATIONALS,
        {
            root: BSet.from_edges("abcduv", [("a", "u"), ("b", "u"), ("u", "v"), ("c", "v"), ("d", "v")]),
            left: BSet.path("A", "V", "B"),
            right: BSet.path("C", "U", "D"),
        },
        {root: {left: "u", right: "v"}},
        {
            (root, left): {"a": "A", "b": "B", "v": "V", "c": "V", "d": "V"},
            (root, right): {"c": "C", "d": "D", "u": "U", "a": "U", "b": "U"},
        },
    )


def deep_star() -> TreeOfBSets:
    """Three nodes on one chain: a star root, a star above it and a linear top."""
    root, mid, top = node(0), node(0, (1, 0)), node(0, (1, 0), (2, 0))
    return TreeOfBSets(
        RATIONALS,
        {
            root: BSet.star("h", ["p", "q", "s", "w"]),
            mid: BSet.star("m", ["P", "Q", "S"]),
            top: BSet.path("Y", "Z", "W"),
        },
        {root: {mid: "h"}, mid: {top: "m"}},
        {
            (root, mid): {"p": "P", "q": "Q", "s": "S", "w": "m"},
            (mid, top): {"P": "Y", "Q": "Z", "S": "W"},
        },
    )
