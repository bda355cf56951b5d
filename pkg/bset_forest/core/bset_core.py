"""Finite positive-type B-sets stored as free trees, and the B/C axiom validators."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum, auto
from functools import cached_property
from typing import TYPE_CHECKING

import networkx as nx

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping

logger = logging.getLogger(__name__)

FRESH_PREFIX = "•"

Triple = tuple[str, str, str]


class BSetError(ValueError):
    """Raised for malformed B-sets and invalid betweenness queries."""


@dataclass(frozen=True)
class BSet:
    """A finite free tree whose path betweenness is the B-relation."""

    vertices: frozenset[str]
    edges: frozenset[frozenset[str]] = field(default=frozenset())

    def __post_init__(self) -> None:
        """Check that the graph is a free tree on at least one vertex."""
        if not self.vertices:
            msg = "a B-set needs at least one vertex"
            raise BSetError(msg)
        for edge in self.edges:
            if len(edge) != 2 or not edge <= self.vertices:  # noqa: PLR2004
                msg = f"bad edge {sorted(edge)}"
                raise BSetError(msg)
        if not nx.is_tree(self.graph):
            msg = f"B-set on {sorted(self.vertices)} is not a free tree"
            raise BSetError(msg)

    @classmethod
    def from_edges(cls, vertices: Iterable[str], edges: Iterable[tuple[str, str]]) -> BSet:
        """Build a B-set from a vertex list and edge pairs."""
        return cls(frozenset(vertices), frozenset(frozenset(e) for e in edges))

    @classmethod
    def path(cls, *ids: str) -> BSet:
        """The linear B-set on the given ids, in order."""
        return cls.from_edges(ids, zip(ids, ids[1:]))

    @classmethod
    def star(cls, centre: str, leaves: Iterable[str]) -> BSet:
        """A star with the given centre."""
        leaves = list(leaves)
        return cls.from_edges([centre, *leaves], [(centre, leaf) for leaf in leaves])

    @cached_property
    def graph(self) -> nx.Graph:
        """The underlying tree as a networkx graph."""
        graph = nx.Graph()
        graph.add_nodes_from(sorted(self.vertices))
        graph.add_edges_from(tuple(sorted(e)) for e in self.edges)
        return graph

    @cached_property
    def _distances(self) -> dict[str, dict[str, int]]:
        return dict(nx.all_pairs_shortest_path_length(self.graph))

    def __len__(self) -> int:
        """Number of vertices."""
        return len(self.vertices)

    def sorted_vertices(self) -> list[str]:
        """Vertices in id order."""
        return sorted(self.vertices)

    def sorted_edges(self) -> list[tuple[str, str]]:
        """Edges as sorted pairs, in order."""
        return sorted(tuple(sorted(e)) for e in self.edges)

    def degree(self, v: str) -> int:
        """Valency of a vertex."""
        self._require(v)
        return self.graph.degree[v]

    def neighbours(self, v: str) -> list[str]:
        """Adjacent vertices in id order."""
        self._require(v)
        return sorted(self.graph.neighbors(v))

    def distance(self, x: str, y: str) -> int:
        """Edge distance between two vertices."""
        return self._distances[x][y]

    def path_between(self, y: str, z: str) -> list[str]:
        """The unique path from y to z, endpoints included."""
        self._require(y, z)
        return nx.shortest_path(self.graph, y, z)

    def relabel(self, mapping: Mapping[str, str]) -> BSet:
        """Rename vertices; ids missing from the mapping are kept."""
        rename = {v: mapping.get(v, v) for v in self.vertices}
        if len(set(rename.values())) != len(rename):
            msg = "relabelling must be injective"
            raise BSetError(msg)
        return BSet.from_edges(rename.values(), [(rename[a], rename[b]) for a, b in self.sorted_edges()])

    def _require(self, *ids: str) -> None:
        for v in ids:
            if v not in self.vertices:
                msg = f"unknown vertex {v!r}"
                raise BSetError(msg)


def between(b: BSet, x: str, y: str, z: str) -> bool:
    """True iff x lies on the path from y to z. Empty on a single vertex."""
    b._require(x, y, z)  # noqa: SLF001
    if len(b) == 1:
        return False
    return b.distance(y, x) + b.distance(x, z) == b.distance(y, z)


def branches_at(b: BSet, v: str) -> list[frozenset[str]]:
    """Connected components of the tree with v removed, ordered by least id."""
    b._require(v)  # noqa: SLF001
    rest = b.graph.subgraph(u for u in b.vertices if u != v)
    return sorted((frozenset(c) for c in nx.connected_components(rest)), key=min)


def branch_containing(b: BSet, v: str, x: str) -> frozenset[str]:
    """The branch at v that contains x."""
    for component in branches_at(b, v):
        if x in component:
            return component
    msg = f"{x!r} lies in no branch at {v!r}"
    raise BSetError(msg)


def ramification_points(b: BSet) -> frozenset[str]:
    """Vertices of valency at least 3."""
    return frozenset(v for v in b.vertices if b.graph.degree[v] >= 3)  # noqa: PLR2004


def leaves(b: BSet) -> frozenset[str]:
    """Vertices of valency 1."""
    return frozenset(v for v in b.vertices if b.graph.degree[v] == 1)


def dyadic(b: BSet) -> frozenset[str]:
    """Vertices of valency 2."""
    return frozenset(v for v in b.vertices if b.graph.degree[v] == 2)  # noqa: PLR2004


def is_linear(b: BSet) -> bool:
    """True iff the B-set has no ramification point."""
    return not ramification_points(b)


class TripleShape(Enum):
    """How three distinct vertices sit in a tree."""

    LINEAR = auto()
    CENTROID = auto()


@dataclass(frozen=True)
class TripleCentre:
    """The middle vertex of a linear triple or the centroid of an incomparable one."""

    shape: TripleShape
    vertex: str


def centroid(b: BSet, x: str, y: str, z: str) -> TripleCentre:
    """Classify three distinct vertices as linear or find their centroid."""
    if len({x, y, z}) != 3:  # noqa: PLR2004
        msg = f"centroid needs distinct vertices, got {(x, y, z)}"
        raise BSetError(msg)
    for middle, p, q in ((x, y, z), (y, x, z), (z, x, y)):
        if between(b, middle, p, q):
            return TripleCentre(TripleShape.LINEAR, middle)
    meeting = set(b.path_between(x, y)) & set(b.path_between(x, z)) & set(b.path_between(y, z))
    (vertex,) = meeting
    return TripleCentre(TripleShape.CENTROID, vertex)


def restrict(b: BSet, subset: Iterable[str]) -> BSet:
    """Induced B-set on a subset: two ids are adjacent iff no other subset id lies between them.

    Raises:
        BSetError: If the subset is not strong, so the induced graph is not a tree.
    """
    subset = frozenset(subset)
    b._require(*subset)  # noqa: SLF001
    edges = [
        (p, q)
        for p, q in itertools.combinations(sorted(subset), 2)
        if not any(between(b, w, p, q) for w in subset if w not in (p, q))
    ]
    return BSet.from_edges(subset, edges)


def is_strong_sub(b1: BSet, b2: BSet) -> bool:
    """True iff b1's betweenness is b2's betweenness restricted to b1's vertices."""
    if not b1.vertices <= b2.vertices:
        msg = "is_strong_sub needs nested vertex sets"
        raise BSetError(msg)
    return is_strong_embedding(b1, b2, {v: v for v in b1.vertices})


def is_strong_embedding(b1: BSet, b2: BSet, phi: Mapping[str, str]) -> bool:
    """True iff phi is injective and preserves and reflects betweenness.

    Sets of at most two points carry no irreflexive betweenness, so any injection is strong.
    """
    if set(phi) != set(b1.vertices) or not set(phi.values()) <= b2.vertices:
        return False
    if len(set(phi.values())) != len(phi):
        return False
    if len(b1) <= 2:  # noqa: PLR2004
        return True
    return all(
        between(b1, x, y, z) == between(b2, phi[x], phi[y], phi[z])
        for x, y, z in itertools.permutations(b1.sorted_vertices(), 3)
    )


def centroids_agree(b1: BSet, b2: BSet) -> bool:
    """Cross-check for strongness: incomparable triples keep their centroid in b2."""
    for x, y, z in itertools.combinations(b1.sorted_vertices(), 3):
        inner = centroid(b1, x, y, z)
        if inner.shape is TripleShape.CENTROID and centroid(b2, x, y, z) != inner:
            return False
        if inner.shape is TripleShape.LINEAR and centroid(b2, x, y, z) != inner:
            return False
    return True


def fresh_id(taken: Iterable[str]) -> str:
    """The first reserved-prefix id not in taken."""
    taken = set(taken)
    k = 0
    while f"{FRESH_PREFIX}{k}" in taken:
        k += 1
    return f"{FRESH_PREFIX}{k}"


# Ternary relations and axioms


@dataclass(frozen=True)
class TernaryRelation:
    """A finite domain with a set of ordered triples."""

    domain: frozenset[str]
    triples: frozenset[Triple] = field(default=frozenset())

    def __post_init__(self) -> None:
        """Check triples lie in the domain."""
        for triple in self.triples:
            if not set(triple) <= self.domain:
                msg = f"triple {triple} leaves the domain"
                raise BSetError(msg)

    def __contains__(self, triple: object) -> bool:
        """Membership of an ordered triple."""
        return triple in self.triples

    def sorted_triples(self) -> list[Triple]:
        """Triples in lexicographic order."""
        return sorted(self.triples)


def derived_relation(b: BSet) -> TernaryRelation:
    """The full betweenness relation of a tree, reflexive triples included."""
    ids = b.sorted_vertices()
    triples = frozenset(t for t in itertools.product(ids, repeat=3) if between(b, *t))
    return TernaryRelation(b.vertices, triples)


def irreflexive(r: TernaryRelation) -> frozenset[Triple]:
    """Triples with pairwise distinct entries."""
    return frozenset(t for t in r.triples if len(set(t)) == 3)  # noqa: PLR2004


@dataclass(frozen=True)
class AxiomResult:
    """Outcome of one axiom check."""

    passed: bool
    counterexample: tuple[str, ...] | None = None


@dataclass
class AxiomReport:
    """Per-axiom results of a validator run."""

    results: dict[str, AxiomResult] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        """True iff every checked axiom passed."""
        return all(r.passed for r in self.results.values())

    def failures(self) -> list[str]:
        """Readable failure lines."""
        return [
            f"{name} fails at {result.counterexample}" for name, result in self.results.items() if not result.passed
        ]

    def __getitem__(self, name: str) -> AxiomResult:
        """Result for a named axiom."""
        return self.results[name]


def _first(candidates: Iterable[tuple[str, ...]]) -> AxiomResult:
    for candidate in candidates:
        return AxiomResult(passed=False, counterexample=candidate)
    return AxiomResult(passed=True)


def validate_b_axioms(r: TernaryRelation) -> AxiomReport:
    """Check B1-B5 by exhaustive quantification.

    A one-point domain carries the empty relation and passes vacuously.
    """
    ids = sorted(r.domain)
    t = r.triples
    report = AxiomReport()
    trivial = len(ids) < 2  # noqa: PLR2004
    cube = list(itertools.product(ids, repeat=3))

    report.results["B1"] = _first((x, y, z) for x, y, z in sorted(t) if (x, z, y) not in t)
    report.results["B2"] = (
        AxiomResult(passed=True)
        if trivial
        else _first((x, y, z) for x, y, z in cube if ((x, y, z) in t and (y, x, z) in t) != (x == y))
    )
    report.results["B3"] = _first(
        (x, y, z, w) for x, y, z in sorted(t) for w in ids if (x, y, w) not in t and (x, w, z) not in t
    )
    report.results["B4"] = (
        AxiomResult(passed=True)
        if trivial
        else _first(
            (x, y, z)
            for x, y, z in cube
            if (x, y, z) not in t and not any(w != x and (w, x, y) in t and (w, x, z) in t for w in ids)
        )
    )
    report.results["B5"] = _first(
        (x, y, z)
        for x, y, z in itertools.combinations(ids, 3)
        if (x, y, z) not in t
        and (y, x, z) not in t
        and (z, x, y) not in t
        and not any((u, x, y) in t and (u, x, z) in t and (u, y, z) in t for u in ids)
    )
    if not report.ok:
        logger.debug("B-axiom failures: %s", report.failures())
    return report


def check_linear(r: TernaryRelation) -> AxiomResult:
    """Totality clause of a linear betweenness: every distinct triple has a middle element."""
    t = r.triples
    return _first(
        (x, y, z)
        for x, y, z in itertools.combinations(sorted(r.domain), 3)
        if (x, y, z) not in t and (y, x, z) not in t and (z, x, y) not in t
    )


def validate_c_axioms(r: TernaryRelation) -> AxiomReport:
    """Check C1-C4 by exhaustive quantification."""
    ids = sorted(r.domain)
    t = r.triples
    report = AxiomReport()
    report.results["C1"] = _first((x, y, z) for x, y, z in sorted(t) if (x, z, y) not in t)
    report.results["C2"] = _first((x, y, z) for x, y, z in sorted(t) if (y, x, z) in t)
    report.results["C3"] = _first(
        (x, y, z, w) for x, y, z in sorted(t) for w in ids if (x, w, z) not in t and (w, y, z) not in t
    )
    report.results["C4"] = _first((x, y) for x, y in itertools.permutations(ids, 2) if (x, y, y) not in t)
    return report


def relation_to_tree(r: TernaryRelation) -> BSet:
    """Rebuild the free tree of a positive-type B-relation.

    Two points are adjacent iff no third point lies between them.

    Raises:
        BSetError: If an axiom fails or the adjacency graph is not a tree.
    """
    report = validate_b_axioms(r)
    if not report.ok:
        msg = f"not a positive-type B-relation: {report.failures()[0]}"
        raise BSetError(msg)
    ids = sorted(r.domain)
    edges = [
        (a, b)
        for a, b in itertools.combinations(ids, 2)
        if not any((c, a, b) in r.triples for c in ids if c not in (a, b))
    ]
    try:
        return BSet.from_edges(ids, edges)
    except BSetError as e:
        msg = "adjacency graph is not a tree"
        raise BSetError(msg) from e


def c_relation_from_hierarchy(clusters: Iterable[Iterable[str]], domain: Iterable[str]) -> TernaryRelation:
    """C-relation of a hierarchy: C(x;y,z) iff some cluster holds y and z but not x.

    Singletons are implied, so C(x;y,y) holds for x != y.
    """
    domain = frozenset(domain)
    family = {frozenset(c) for c in clusters} | {frozenset({v}) for v in domain}
    triples = frozenset(
        (x, y, z)
        for x, y, z in itertools.product(sorted(domain), repeat=3)
        if any(y in c and z in c and x not in c for c in family)
    )
    return TernaryRelation(domain, triples)
