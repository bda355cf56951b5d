"""Data models for trees of B-sets and their L-relations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING

from bset_forest.core.ambient_tree import AmbientNode, ColorChain, node_leq, node_lt
from bset_forest.core.bset_core import BSet, Triple

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping

    from bset_forest.core.ambient_tree import Colour

Edge = tuple[AmbientNode, AmbientNode]


class ForestError(ValueError):
    """Raised when a tree of B-sets is malformed or an operation is out of range."""


@dataclass(frozen=True, eq=False)
class TreeOfBSets:
    """A finite meet-closed coloured subtree carrying a B-set per node and the f/g maps.

    ``f[s][t]`` is the ramification point of ``B(s)`` belonging to the child ``t`` and
    ``g[(s, t)]`` collapses the branches of ``B(s)`` at that point onto ``B(t)``.
    """

    chain: ColorChain
    bsets: Mapping[AmbientNode, BSet]
    f: Mapping[AmbientNode, Mapping[AmbientNode, str]] = field(default_factory=dict)
    g: Mapping[Edge, Mapping[str, str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Freeze copies of the maps and require a minimum node."""
        object.__setattr__(self, "bsets", dict(self.bsets))
        object.__setattr__(self, "f", {s: dict(kids) for s, kids in self.f.items() if kids})
        object.__setattr__(self, "g", {edge: dict(m) for edge, m in self.g.items()})
        if not self.bsets:
            msg = "a tree of B-sets needs at least one node"
            raise ForestError(msg)
        lowest = [t for t in self.bsets if all(node_leq(t, u) for u in self.bsets)]
        if not lowest:
            msg = "node set has no minimum"
            raise ForestError(msg)

    @classmethod
    def single(cls, chain: ColorChain, node: AmbientNode, bset: BSet) -> TreeOfBSets:
        """A one-node tree."""
        return cls(chain, {node: bset})

    def __eq__(self, other: object) -> bool:
        """Structural equality over chain, nodes, B-sets and maps."""
        if not isinstance(other, TreeOfBSets):
            return NotImplemented
        return (
            self.chain == other.chain
            and self.bsets == other.bsets
            and self.f == other.f
            and self.g == other.g
        )

    __hash__ = None  # type: ignore[assignment]

    @cached_property
    def nodes(self) -> tuple[AmbientNode, ...]:
        """Nodes in sorted sequence order."""
        return tuple(sorted(self.bsets))

    @cached_property
    def root(self) -> AmbientNode:
        """The minimum node."""
        return next(t for t in self.nodes if all(node_leq(t, u) for u in self.nodes))

    @property
    def root_bset(self) -> BSet:
        """B-set at the root."""
        return self.bsets[self.root]

    @property
    def domain(self) -> frozenset[str]:
        """The root vertices M."""
        return self.root_bset.vertices

    @cached_property
    def _parents(self) -> dict[AmbientNode, AmbientNode]:
        parents = {}
        for t in self.nodes:
            below = [u for u in self.nodes if node_lt(u, t)]
            if below:
                parents[t] = max(below, key=lambda u: len([w for w in below if node_leq(w, u)]))
        return parents

    def parent(self, t: AmbientNode) -> AmbientNode | None:
        """The immediate predecessor of t, or None at the root."""
        self.require(t)
        return self._parents.get(t)

    def children(self, t: AmbientNode) -> list[AmbientNode]:
        """Nodes whose immediate predecessor is t, in sorted order."""
        self.require(t)
        return sorted(u for u, p in self._parents.items() if p == t)

    def colour(self, t: AmbientNode) -> Colour:
        """Colour of a node."""
        self.require(t)
        return t.colour

    def require(self, *nodes: AmbientNode) -> None:
        """Raise ForestError for nodes not in the tree."""
        for t in nodes:
            if t not in self.bsets:
                msg = f"unknown node {t}"
                raise ForestError(msg)

    def all_ids(self) -> set[str]:
        """Every vertex id used at any node."""
        return {v for b in self.bsets.values() for v in b.vertices}

    def size(self) -> tuple[int, int]:
        """Number of nodes and of root vertices."""
        return len(self.bsets), len(self.domain)


@dataclass(frozen=True)
class LSet:
    """The root domain M with its compiled L-relation."""

    domain: frozenset[str]
    triples: frozenset[Triple] = field(default=frozenset())

    def __post_init__(self) -> None:
        """Check distinct entries, 2/3 symmetry and the orientation clause."""
        for x, y, z in self.triples:
            if len({x, y, z}) != 3 or not {x, y, z} <= self.domain:  # noqa: PLR2004
                msg = f"L-triple {(x, y, z)} must have distinct entries from the domain"
                raise ForestError(msg)
            if (x, z, y) not in self.triples:
                msg = f"L is not symmetric in its last two entries at {(x, y, z)}"
                raise ForestError(msg)
        for x, y, z in itertools.combinations(sorted(self.domain), 3):
            firsts = {a for a, b, c in ((x, y, z), (y, x, z), (z, x, y)) if (a, b, c) in self.triples}
            if len(firsts) != 1:
                msg = f"triple {{{x},{y},{z}}} must be L-related in exactly one orientation"
                raise ForestError(msg)

    @classmethod
    def build(cls, domain: Iterable[str], triples: Iterable[Triple]) -> LSet:
        """Build from any iterables."""
        return cls(frozenset(domain), frozenset(triples))

    def __contains__(self, triple: object) -> bool:
        """Membership of an ordered triple."""
        return triple in self.triples

    def sorted_triples(self) -> list[Triple]:
        """Triples in lexicographic order."""
        return sorted(self.triples)

    def relabel(self, mapping: Mapping[str, str]) -> LSet:
        """Image under a bijection of the domain."""
        return LSet(
            frozenset(mapping[v] for v in self.domain),
            frozenset((mapping[x], mapping[y], mapping[z]) for x, y, z in self.triples),
        )
