"""Rebuilding trees of B-sets from bare L-relations.

Colours cannot be read off an L-relation, so the result is an ``AbstractForest``: the shape
of a tree of B-sets with synthetic node ids ``n0``, ``n0.1``, ``n0.1.2`` and so on.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import networkx as nx

from bset_forest.core.ambient_tree import node_leq
from bset_forest.core.bset_core import (
    BSet,
    BSetError,
    branches_at,
    is_linear,
    ramification_points,
)
from bset_forest.data.forest import ValidationReport, collapse_problem, g_composite
from bset_forest.data.models import LSet
from bset_forest.services.morphisms import root_isomorphisms

if TYPE_CHECKING:
    from bset_forest.core.ambient_tree import AmbientNode
    from bset_forest.data.models import TreeOfBSets

logger = logging.getLogger(__name__)

FOREST_HEADER = "FOREST v1"
ROOT_ID = "n0"


class ReconstructError(ValueError):
    """Raised when an L-set is not the L-relation of any finite tree of B-sets."""


@dataclass(frozen=True, eq=False)
class AbstractForest:
    """Uncoloured tree of B-sets: node ids with parent links, B-sets, f and g."""

    bsets: dict[str, BSet]
    parent: dict[str, str | None]
    f: dict[str, dict[str, str]] = field(default_factory=dict)
    g: dict[tuple[str, str], dict[str, str]] = field(default_factory=dict)

    @property
    def root(self) -> str:
        """The node without a parent."""
        return next(n for n, p in sorted(self.parent.items()) if p is None)

    @property
    def root_bset(self) -> BSet:
        """B-set at the root."""
        return self.bsets[self.root]

    def children(self, node: str) -> list[str]:
        """Child ids in sorted order."""
        return sorted(n for n, p in self.parent.items() if p == node)

    def child_at(self, node: str, v: str) -> str | None:
        """The child attached at vertex v, if any."""
        return next((t for t, w in self.f.get(node, {}).items() if w == v), None)


@dataclass(frozen=True)
class ShapeIsomorphism:
    """A colour-erasing isomorphism from a tree of B-sets onto an abstract forest."""

    nodes: dict[AmbientNode, str]
    vertices: dict[AmbientNode, dict[str, str]]


@dataclass(frozen=True)
class OrderReport:
    """The class-separation criterion against the actual node order."""

    criterion: bool
    actual: bool

    @property
    def agrees(self) -> bool:
        """True iff the criterion matches the order."""
        return self.criterion == self.actual


def root_adjacency(m: LSet) -> BSet:
    """The root B-set of any tree of B-sets with L-relation m.

    Two points are adjacent iff no third point lies L-between them.

    Raises:
        ReconstructError: If the adjacency graph is not a tree.
    """
    ids = sorted(m.domain)
    edges = [
        (a, b)
        for a, b in itertools.combinations(ids, 2)
        if not any((c, a, b) in m for c in ids if c not in (a, b))
    ]
    try:
        return BSet.from_edges(ids, edges)
    except BSetError as e:
        msg = f"root adjacency is not a tree: {e}"
        raise ReconstructError(msg) from e


def _branch_names(b: BSet, w: str) -> dict[str, str]:
    return {x: min(component) for component in branches_at(b, w) for x in component}


def quotient_l(m: LSet, w: str) -> LSet:
    """The L-relation induced on the branches at a ramification point w.

    Each branch is named by its least member; a triple of distinct branches is in the
    quotient iff its representatives are in m.

    Raises:
        ReconstructError: If w is not a ramification point of the root adjacency.
    """
    b = root_adjacency(m)
    if w not in b.vertices or b.degree(w) < 3:  # noqa: PLR2004
        msg = f"{w!r} is not a ramification point"
        raise ReconstructError(msg)
    name = _branch_names(b, w)
    triples = {
        (name[x], name[y], name[z])
        for x, y, z in m.triples
        if w not in (x, y, z) and len({name[x], name[y], name[z]}) == 3  # noqa: PLR2004
    }
    return LSet.build(set(name.values()), triples)


def recover_tree(m: LSet) -> AbstractForest:
    """Rebuild the shape of the tree of B-sets whose L-relation is m.

    Raises:
        ReconstructError: If some level fails to form a tree or the shape is invalid.
    """
    bsets: dict[str, BSet] = {}
    parent: dict[str, str | None] = {ROOT_ID: None}
    f: dict[str, dict[str, str]] = {}
    g: dict[tuple[str, str], dict[str, str]] = {}

    def recover(current: LSet, node: str) -> None:
        b = root_adjacency(current)
        bsets[node] = b
        for k, w in enumerate(sorted(ramification_points(b)), start=1):
            child = f"{node}.{k}"
            parent[child] = node
            f.setdefault(node, {})[child] = w
            g[(node, child)] = _branch_names(b, w)
            recover(quotient_l(current, w), child)

    recover(m, ROOT_ID)
    forest = AbstractForest(bsets, parent, f, g)
    report = validate_shape(forest)
    if not report.ok:
        raise ReconstructError(report.problems[0])
    logger.info("recovered a forest with %d nodes", len(bsets))
    return forest


def validate_shape(forest: AbstractForest) -> ValidationReport:
    """Check the structural clauses of an abstract forest."""
    report = ValidationReport()
    roots = [n for n, p in forest.parent.items() if p is None]
    if len(roots) != 1:
        report.add(f"expected one root, found {sorted(roots)}")
        return report
    if set(forest.parent) != set(forest.bsets):
        report.add("parent links and B-sets name different nodes")
        return report
    graph = nx.DiGraph((p, n) for n, p in forest.parent.items() if p is not None)
    graph.add_nodes_from(forest.parent)
    if not nx.is_arborescence(graph):
        report.add("parent links do not form a rooted tree")
        return report
    for node, b in sorted(forest.bsets.items()):
        kids = forest.children(node)
        declared = forest.f.get(node, {})
        if set(declared) != set(kids):
            report.add(f"node {node}: f is declared on {sorted(declared)} but the children are {kids}")
            continue
        images = [declared[t] for t in kids]
        if len(set(images)) != len(images) or set(images) != ramification_points(b):
            report.add(f"node {node}: f does not biject children onto ramification points")
        if not kids and not is_linear(b):
            report.add(f"node {node}: leaf node must carry a linear B-set")
        for t in kids:
            gmap = forest.g.get((node, t))
            problem = "missing g" if gmap is None else collapse_problem(b, declared[t], forest.bsets[t], gmap)
            if problem is not None:
                report.add(f"edge {node} -> {t}: {problem}")
    return report


def _lift_shape(a: TreeOfBSets, s: AbstractForest, psi: dict[str, str]) -> ShapeIsomorphism | None:
    nodes = {a.root: s.root}
    vertices = {a.root: dict(psi)}
    queue = [a.root]
    while queue:
        t = queue.pop(0)
        phi = vertices[t]
        for child in a.children(t):
            target = s.child_at(nodes[t], phi[a.f[t][child]])
            if target is None:
                return None
            step = s.g[(nodes[t], target)]
            upper: dict[str, str] = {}
            for x, y in a.g[(t, child)].items():
                if upper.setdefault(y, step[phi[x]]) != step[phi[x]]:
                    return None
            if a.bsets[child].relabel(upper) != s.bsets[target]:
                return None
            nodes[child] = target
            vertices[child] = upper
            queue.append(child)
    if len(nodes) != len(s.bsets):
        return None
    return ShapeIsomorphism(nodes, vertices)


def align(a: TreeOfBSets, s: AbstractForest) -> ShapeIsomorphism | None:
    """A colour-erasing isomorphism from a onto s, if one exists."""
    if len(a.nodes) != len(s.bsets):
        return None
    for psi in root_isomorphisms(a.root_bset, s.root_bset):
        found = _lift_shape(a, s, psi)
        if found is not None:
            return found
    return None


def order_criterion(a: TreeOfBSets, s: AmbientNode, t: AmbientNode) -> OrderReport:
    """Evaluate "classes distinct at t stay distinct at s" against s <= t."""
    a.require(s, t)
    at_s = g_composite(a, a.root, s)
    at_t = g_composite(a, a.root, t)
    criterion = all(
        x in at_s and y in at_s and at_s[x] != at_s[y]
        for x, y in itertools.combinations(sorted(at_t), 2)
        if at_t[x] != at_t[y]
    )
    report = OrderReport(criterion, node_leq(s, t))
    if not report.agrees:
        logger.info("order criterion disagrees with the node order at %s, %s", s, t)
    return report


def dump_forest(forest: AbstractForest) -> str:
    """Serialize an abstract forest in the ``FOREST v1`` format."""
    lines = [FOREST_HEADER]
    for node in sorted(forest.bsets):
        b = forest.bsets[node]
        lines.append(f"node {node} parent {forest.parent[node] or '-'}")
        lines.append("vertices " + " ".join(b.sorted_vertices()))
        lines.append(("edges " + " ".join(f"{p}-{q}" for p, q in b.sorted_edges())).rstrip())
        for child in forest.children(node):
            lines.append(f"f {child} -> {forest.f[node][child]}")
            gmap = forest.g[(node, child)]
            lines.append(f"g {child}: " + " ".join(f"{v}->{gmap[v]}" for v in sorted(gmap)))
    return "\n".join(lines) + "\n"


def positive_type_relations_inside(m: LSet) -> list[BSet]:
    """Every tree on m's domain whose strict betweenness lies inside m, by brute force."""
    ids = sorted(m.domain)
    n = len(ids)
    if n <= 2:  # noqa: PLR2004
        candidates = [BSet.from_edges(ids, list(itertools.combinations(ids, 2)))]
    else:
        candidates = []
        for sequence in itertools.product(range(n), repeat=n - 2):
            tree = nx.from_prufer_sequence(list(sequence))
            candidates.append(BSet.from_edges(ids, [(ids[p], ids[q]) for p, q in tree.edges]))
    found = []
    for b in candidates:
        inside = all(
            (x, y, z) in m
            for x, y, z in itertools.permutations(ids, 3)
            if y < z and b.distance(y, x) + b.distance(x, z) == b.distance(y, z)
        )
        if inside:
            found.append(b)
    return found
