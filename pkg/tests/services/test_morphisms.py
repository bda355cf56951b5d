"""Tests for the morphisms module.

This module contains tests for arboreal isomorphisms, strong embeddings, their lifts from
root data and the automorphism orbits of triples.
"""

import random

import pytest

from bset_forest.data.forest import compute_l
from bset_forest.data.models import TreeOfBSets
from bset_forest.data.samples import RATIONALS, deep_star, e2, node, single_path, twin_stars
from bset_forest.services.generators import InstanceBounds, random_instance
from bset_forest.services.morphisms import (
    AUTOMORPHISM_GUARD,
    ArborealMorphism,
    MorphismError,
    MorphismKind,
    automorphisms,
    check,
    identity,
    image,
    inclusion,
    induced_l_map,
    is_strong_substructure,
    l_iso_to_arboreal,
    lift_embedding,
    symmetric_orbit_union,
    triple_orbits,
)

# Test constants
ROOT = node(0)
CHILD = node(0, (1, 0))
SWAP_ROOT = {"e": "e", "x1": "x3", "x2": "x2", "x3": "x1"}
SWAP_CHILD = {"X1": "X3", "X2": "X2", "X3": "X1"}
RANDOM_INSTANCES = 40
RANDOM_BOUNDS = InstanceBounds(max_nodes=3, max_root=6)


@pytest.fixture
def swap() -> ArborealMorphism:
    """Fixture providing the E2 automorphism exchanging x1 and x3."""
    return ArborealMorphism({ROOT: ROOT, CHILD: CHILD}, {ROOT: SWAP_ROOT, CHILD: SWAP_CHILD}, MorphismKind.ISOMORPHISM)


def test_identity_passes() -> None:
    """Test the identity is an isomorphism of every sample."""
    for a in (e2(), twin_stars(), deep_star()):
        assert check(identity(a), a, a).ok  # noqa: S101


def test_swap_passes(swap: ArborealMorphism) -> None:
    """Test the x1/x3 exchange on E2 is coherent."""
    a = e2()
    assert check(swap, a, a).ok  # noqa: S101
    assert swap.then(swap) == identity(a)  # noqa: S101
    assert swap.inverse() == swap  # noqa: S101


def test_incoherent_child_map_fails() -> None:
    """Test swapping at the root alone breaks g-coherence."""
    a = e2()
    broken = ArborealMorphism({ROOT: ROOT, CHILD: CHILD}, {ROOT: SWAP_ROOT, CHILD: {v: v for v in SWAP_CHILD}})
    report = check(broken, a, a)
    assert not report.ok  # noqa: S101
    assert any("g is not coherent" in problem for problem in report.problems)  # noqa: S101


def test_leaf_extension_inclusion() -> None:
    """Test a path includes strongly into its leaf extension."""
    small, large = single_path("a", "b", "c"), single_path("a", "b", "c", "d")
    m = inclusion(small, large)
    assert check(m, small, large).ok  # noqa: S101
    assert is_strong_substructure(small, large)  # noqa: S101
    assert induced_l_map(m, small, large) == {"a": "a", "b": "b", "c": "c"}  # noqa: S101
    assert not is_strong_substructure(single_path("a", "c", "b"), large)  # noqa: S101
    with pytest.raises(MorphismError):
        m.inverse()


def test_image_of_identity() -> None:
    """Test the image of the identity is the instance itself."""
    a = twin_stars()
    assert image(identity(a), a, a) == a  # noqa: S101


def test_lift_embedding_climbs_to_colour() -> None:
    """Test a linear node embeds into E2 at its child by climbing from the root data."""
    a = e2()
    upper = single_path("P", "Q", "R", colour=1)
    m = lift_embedding(upper, a, CHILD, {"P": "X1", "Q": "X2", "R": "X3"})
    assert m.tau == {node(1): CHILD}  # noqa: S101


def test_lift_embedding_rejects_bad_root_data() -> None:
    """Test root data without a matching child does not lift."""
    a = e2()
    with pytest.raises(MorphismError):
        lift_embedding(a, a, ROOT, {"e": "x1", "x1": "e", "x2": "x2", "x3": "x3"})


def test_l_iso_to_arboreal_examples(swap: ArborealMorphism) -> None:
    """Test lifting the identity and the x1/x3 exchange of E2."""
    a = e2()
    assert l_iso_to_arboreal(a, a, {v: v for v in a.domain}) == identity(a)  # noqa: S101
    assert l_iso_to_arboreal(a, a, SWAP_ROOT) == swap  # noqa: S101
    with pytest.raises(MorphismError):
        l_iso_to_arboreal(a, a, {"e": "e", "x1": "x2", "x2": "x1", "x3": "x3"})


def test_automorphism_counts() -> None:
    """Test automorphism groups of short paths and E2."""
    assert len(automorphisms(single_path("a", "b", "c"))) == 2  # noqa: S101
    assert len(automorphisms(single_path("a", "b"))) == 2  # noqa: S101
    roots = [m.phi[ROOT] for m in automorphisms(e2())]
    assert roots == [{v: v for v in SWAP_ROOT}, SWAP_ROOT]  # noqa: S101


@pytest.fixture
def corpus() -> list[TreeOfBSets]:
    """Fixture providing the samples and seeded random instances."""
    rng = random.Random(5)
    randoms = [random_instance(rng, RATIONALS, RANDOM_BOUNDS) for _ in range(RANDOM_INSTANCES)]
    return [e2(), twin_stars(), deep_star(), *randoms]


def test_automorphisms_round_trip_through_l(corpus: list[TreeOfBSets]) -> None:
    """Test each automorphism induces its own root map on L and lifts back to itself."""
    for a in corpus:
        for m in automorphisms(a):
            psi = induced_l_map(m, a, a)
            assert psi == m.phi[a.root]  # noqa: S101
            assert l_iso_to_arboreal(a, a, psi) == m  # noqa: S101


def test_automorphism_guard() -> None:
    """Test the search refuses large root domains."""
    ids = [f"v{i}" for i in range(AUTOMORPHISM_GUARD + 1)]
    with pytest.raises(MorphismError):
        automorphisms(single_path(*ids))


def test_orbits_respect_l() -> None:
    """Test each triple orbit lies inside L or outside it, and the symmetric union lies inside."""
    for a in (e2(), twin_stars(), deep_star(), single_path("a", "b", "c", "d")):
        m = compute_l(a)
        for orbit in triple_orbits(a):
            inside = {t in m for t in orbit}
            assert len(inside) == 1  # noqa: S101
        assert symmetric_orbit_union(a) <= m.triples  # noqa: S101


def test_e2_symmetric_union_is_strictly_smaller_than_l() -> None:
    """Test E2's symmetric orbits cover only the triples fixed up to the x1/x3 exchange."""
    union = symmetric_orbit_union(e2())
    assert union == {  # noqa: S101
        ("x2", "x1", "x3"),
        ("x2", "x3", "x1"),
        ("e", "x1", "x3"),
        ("e", "x3", "x1"),
    }
    assert union < compute_l(e2()).triples  # noqa: S101
