"""Validation and structural operations on trees of B-sets.

Covers composite g-maps, the [a]_t classes, restriction above a node, L-compilation with
witness nodes, and pre-sets and pre-branches.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from bset_forest.core.ambient_tree import is_meet_closed, node_leq, node_lt
from bset_forest.core.bset_core import (
    BSetError,
    Triple,
    TripleShape,
    between,
    branch_containing,
    branches_at,
    centroid,
    is_linear,
    ramification_points,
)
from bset_forest.data.models import ForestError, LSet, TreeOfBSets

if TYPE_CHECKING:
    from collections.abc import Mapping

    from bset_forest.core.ambient_tree import AmbientNode
    from bset_forest.core.bset_core import BSet

logger = logging.getLogger(__name__)


@dataclass
class ValidationReport:
    """Problems found by validate; empty when the instance is valid."""

    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        """True iff no clause failed."""
        return not self.problems

    def add(self, problem: str) -> None:
        """Record a failed clause."""
        self.problems.append(problem)


def validate(a: TreeOfBSets) -> ValidationReport:
    """Check every structural clause of a tree of B-sets."""
    report = ValidationReport()
    nodes = a.nodes
    for t in nodes:
        try:
            for colour, _ in t.entries():
                a.chain.validate_colour(colour)
        except ValueError as e:
            report.add(f"node {t}: {e}")
    if not report.ok:
        return report
    if not is_meet_closed(nodes):
        report.add("node set is not meet-closed")
        return report

    for s in nodes:
        b = a.bsets[s]
        kids = a.children(s)
        declared = a.f.get(s, {})
        if set(declared) != set(kids):
            report.add(f"node {s}: f is declared on {sorted(declared)} but the children are {kids}")
            continue
        images = [declared[t] for t in kids]
        if len(set(images)) != len(images) or set(images) != ramification_points(b):
            report.add(f"node {s}: f does not biject children onto ramification points {sorted(ramification_points(b))}")
        if not kids and not is_linear(b):
            report.add(f"node {s}: leaf node must carry a linear B-set")
        for t in kids:
            _check_g(a, s, t, report)
    extra = set(a.g) - {(s, t) for s in nodes for t in a.children(s)}
    if extra:
        report.add(f"g declared on non-edges {sorted(extra)}")
    extra_f = set(a.f) - set(nodes)
    if extra_f:
        report.add(f"f declared on unknown nodes {sorted(extra_f)}")
    return report


def _check_g(a: TreeOfBSets, s: AmbientNode, t: AmbientNode, report: ValidationReport) -> None:
    gmap = a.g.get((s, t))
    if gmap is None:
        report.add(f"edge {s} -> {t}: missing g")
        return
    problem = collapse_problem(a.bsets[s], a.f[s][t], a.bsets[t], gmap)
    if problem is not None:
        report.add(f"edge {s} -> {t}: {problem}")


def collapse_problem(b: BSet, w: str, bt: BSet, gmap: Mapping[str, str]) -> str | None:
    """Why gmap fails to collapse the branches of b at w bijectively onto bt, or None."""
    if set(gmap) != b.vertices - {w}:
        return f"g must be defined exactly off {w!r}"
    if not set(gmap.values()) <= bt.vertices:
        return "g leaves the upper B-set"
    targets = []
    for component in branches_at(b, w):
        values = {gmap[x] for x in component}
        if len(values) != 1:
            return f"g is not constant on the branch {sorted(component)}"
        targets.append(values.pop())
    if len(set(targets)) != len(targets) or set(targets) != bt.vertices:
        return f"branches at {w!r} do not biject onto the upper B-set"
    return None


def require_valid(a: TreeOfBSets) -> TreeOfBSets:
    """Return a if it validates, else raise ForestError with the first problem."""
    report = validate(a)
    if not report.ok:
        raise ForestError(report.problems[0])
    return a


def successor_toward(a: TreeOfBSets, s: AmbientNode, t: AmbientNode) -> AmbientNode:
    """The child of s below or equal to t."""
    if not node_lt(s, t):
        msg = f"{t} is not above {s}"
        raise ForestError(msg)
    for child in a.children(s):
        if node_leq(child, t):
            return child
    msg = f"no child of {s} lies below {t}"
    raise ForestError(msg)


def f_general(a: TreeOfBSets, s: AmbientNode, t: AmbientNode) -> str:
    """The vertex of B(s) pointing toward a node t above s."""
    return a.f[s][successor_toward(a, s, t)]


def child_at(a: TreeOfBSets, s: AmbientNode, v: str) -> AmbientNode | None:
    """The child of s attached at vertex v, if any."""
    for t, w in a.f.get(s, {}).items():
        if w == v:
            return t
    return None


def chain_between(a: TreeOfBSets, s: AmbientNode, t: AmbientNode) -> list[AmbientNode]:
    """Nodes s = u0 < u1 < ... < uk = t of the tree."""
    a.require(s, t)
    if not node_leq(s, t):
        msg = f"{s} is not below {t}"
        raise ForestError(msg)
    path = [t]
    while path[-1] != s:
        path.append(a.parent(path[-1]))
    return path[::-1]


def g_composite(a: TreeOfBSets, s: AmbientNode, t: AmbientNode) -> dict[str, str]:
    """Composite of the g-maps along the chain from s to t, on its natural domain."""
    path = chain_between(a, s, t)
    current = {v: v for v in a.bsets[s].vertices}
    for lower, upper in itertools.pairwise(path):
        step = a.g[(lower, upper)]
        current = {x: step[y] for x, y in current.items() if y in step}
    return current


def class_of(a: TreeOfBSets, x: str, t: AmbientNode) -> frozenset[str] | None:
    """The class [x]_t, or None when x is outside the pre-set at t."""
    if x not in a.domain:
        msg = f"unknown root vertex {x!r}"
        raise ForestError(msg)
    comp = g_composite(a, a.root, t)
    if x not in comp:
        return None
    return frozenset(y for y, image in comp.items() if image == comp[x])


def restrict_above(a: TreeOfBSets, s: AmbientNode) -> TreeOfBSets:
    """The tree of B-sets on the nodes at or above s."""
    a.require(s)
    keep = [t for t in a.nodes if node_leq(s, t)]
    return TreeOfBSets(
        a.chain,
        {t: a.bsets[t] for t in keep},
        {t: a.f[t] for t in keep if t in a.f},
        {edge: m for edge, m in a.g.items() if edge[0] in keep},
    )


def _fibers(comp: dict[str, str]) -> dict[str, set[str]]:
    fibers: dict[str, set[str]] = {}
    for x, image in comp.items():
        fibers.setdefault(image, set()).add(x)
    return fibers


def compute_l(a: TreeOfBSets) -> LSet:
    """Compile the L-relation: triples witnessed by betweenness on distinct classes.

    Raises:
        ForestError: If a does not validate.
    """
    require_valid(a)
    triples: set[Triple] = set()
    for t in a.nodes:
        b = a.bsets[t]
        fibers = _fibers(g_composite(a, a.root, t))
        for u, v, w in itertools.permutations(b.sorted_vertices(), 3):
            if v < w and between(b, u, v, w):
                for x, y, z in itertools.product(fibers[u], fibers[v], fibers[w]):
                    triples.add((x, y, z))
                    triples.add((x, z, y))
    return LSet(a.domain, frozenset(triples))


def witness_node(a: TreeOfBSets, x: str, y: str, z: str) -> AmbientNode:
    """The unique node witnessing L(x;y,z), found by climbing through centroids."""
    for v in (x, y, z):
        if v not in a.domain:
            msg = f"unknown root vertex {v!r}"
            raise ForestError(msg)
    if len({x, y, z}) != 3:  # noqa: PLR2004
        msg = f"({x};{y},{z}) is not in L"
        raise ForestError(msg)
    t = a.root
    while True:
        comp = g_composite(a, a.root, t)
        cx, cy, cz = comp[x], comp[y], comp[z]
        centre = centroid(a.bsets[t], cx, cy, cz)
        if centre.shape is TripleShape.LINEAR:
            if centre.vertex == cx:
                return t
            msg = f"({x};{y},{z}) is not in L"
            raise ForestError(msg)
        child = child_at(a, t, centre.vertex)
        if child is None:
            msg = f"centroid {centre.vertex!r} at {t} has no child node"
            raise ForestError(msg)
        t = child


def witness_scan(a: TreeOfBSets, x: str, y: str, z: str) -> list[AmbientNode]:
    """Every node where the three classes are defined, distinct and x's class is between."""
    found = []
    for t in a.nodes:
        comp = g_composite(a, a.root, t)
        if not {x, y, z} <= comp.keys():
            continue
        cx, cy, cz = comp[x], comp[y], comp[z]
        if len({cx, cy, cz}) == 3 and between(a.bsets[t], cx, cy, cz):  # noqa: PLR2004
            found.append(t)
    return found


def pre_set(a: TreeOfBSets, t: AmbientNode) -> frozenset[str]:
    """S_t: the root vertices whose class at t is defined."""
    return frozenset(g_composite(a, a.root, t))


def class_partition(a: TreeOfBSets, t: AmbientNode) -> list[frozenset[str]]:
    """E_t: the classes at t, ordered by least member."""
    return sorted((frozenset(f) for f in _fibers(g_composite(a, a.root, t)).values()), key=min)


def pre_branches(a: TreeOfBSets, t: AmbientNode, v: str) -> list[frozenset[str]]:
    """Pre-branches at v: unions of classes over each branch of B(t) at v."""
    b = a.bsets[t]
    try:
        components = branches_at(b, v)
    except BSetError as e:
        raise ForestError(str(e)) from e
    fibers = _fibers(g_composite(a, a.root, t))
    return [frozenset(x for u in component for x in fibers[u]) for component in components]


def pre_branch(a: TreeOfBSets, t: AmbientNode, v: str, which: int) -> frozenset[str]:
    """The pre-branch over branch number ``which`` (branches ordered by least vertex id)."""
    options = pre_branches(a, t, v)
    if not 0 <= which < len(options):
        msg = f"vertex {v!r} at {t} has {len(options)} branches"
        raise ForestError(msg)
    return options[which]


def branch_label(a: TreeOfBSets, s: AmbientNode, t: AmbientNode, x: str) -> str:
    """Vertex of B(t) that the branch of x at f_s(t) collapses to."""
    w = a.f[s][t]
    component = branch_containing(a.bsets[s], w, x)
    return a.g[(s, t)][min(component)]
