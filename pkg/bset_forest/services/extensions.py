"""One-point extensions: the five kinds, applying them, and recognising them.

An extension grows the root B-set by exactly one vertex. A star puts a new root below the
old one, whose B-set is a star with the new vertex as hub. The root kinds keep the root and
attach the new vertex as a leaf, on an edge, at a dyadic vertex (creating a new node above
it), or at a ramification point (which recursively extends the tree above that point).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum, auto
from typing import TYPE_CHECKING

from bset_forest.core.ambient_tree import ancestor_at, format_node, node_lt
from bset_forest.core.bset_core import BSet, between, branch_containing
from bset_forest.data.forest import child_at, g_composite, restrict_above, validate
from bset_forest.data.models import TreeOfBSets
from bset_forest.services.morphisms import is_strong_substructure

if TYPE_CHECKING:
    from bset_forest.core.ambient_tree import AmbientNode

logger = logging.getLogger(__name__)


class ExtensionError(ValueError):
    """Raised when an extension recipe does not apply or a pair is not a one-point extension."""


class ExtensionTag(Enum):
    """The five one-point extension types."""

    STAR = auto()
    LEAF = auto()
    DYADIC = auto()
    TERNARY = auto()
    RAMIFICATION = auto()


@dataclass(frozen=True)
class ExtensionKind:
    """A complete recipe for a one-point extension.

    ``vertex`` is the new root vertex (the hub for a star). ``neighbours`` holds u, or the
    sorted pair u, v for a dyadic extension. ``node`` is the new root of a star or the new
    node of a ternary extension. ``labels`` pairs old root vertices with leaf ids for a star,
    and lists three (representative, label) pairs in path order for a ternary extension.
    ``above`` is the extension applied above u for a ramification extension.
    """

    tag: ExtensionTag
    vertex: str
    neighbours: tuple[str, ...] = ()
    node: AmbientNode | None = None
    labels: tuple[tuple[str, str], ...] = ()
    above: ExtensionKind | None = None

    def __post_init__(self) -> None:
        """Check arity against the tag and normalise dyadic pairs."""
        arity = {
            ExtensionTag.STAR: 0,
            ExtensionTag.LEAF: 1,
            ExtensionTag.DYADIC: 2,
            ExtensionTag.TERNARY: 1,
            ExtensionTag.RAMIFICATION: 1,
        }[self.tag]
        if len(self.neighbours) != arity:
            msg = f"{self.tag.name} takes {arity} neighbour(s)"
            raise ExtensionError(msg)
        if self.tag is ExtensionTag.DYADIC:
            object.__setattr__(self, "neighbours", tuple(sorted(self.neighbours)))
        if (self.node is None) != (self.tag not in (ExtensionTag.STAR, ExtensionTag.TERNARY)):
            msg = f"{self.tag.name} {'needs' if self.node is None else 'takes no'} node"
            raise ExtensionError(msg)
        if self.tag is ExtensionTag.TERNARY and len(self.labels) != 3:  # noqa: PLR2004
            msg = "a ternary extension lists three labels"
            raise ExtensionError(msg)
        if (self.above is None) != (self.tag is not ExtensionTag.RAMIFICATION):
            msg = "only ramification extensions carry an inner extension"
            raise ExtensionError(msg)

    @classmethod
    def star(cls, node: AmbientNode, hub: str, labels: dict[str, str]) -> ExtensionKind:
        """Star below the root; labels maps each old root vertex to its leaf id."""
        return cls(ExtensionTag.STAR, hub, node=node, labels=tuple(sorted(labels.items())))

    @classmethod
    def leaf(cls, e: str, u: str) -> ExtensionKind:
        """New leaf e on u."""
        return cls(ExtensionTag.LEAF, e, (u,))

    @classmethod
    def dyadic(cls, e: str, u: str, v: str) -> ExtensionKind:
        """Subdivide the edge u-v by e."""
        return cls(ExtensionTag.DYADIC, e, (u, v))

    @classmethod
    def ternary(cls, e: str, u: str, node: AmbientNode, labels: list[tuple[str, str]]) -> ExtensionKind:
        """Make dyadic u ramify with new node above it; labels in path order."""
        return cls(ExtensionTag.TERNARY, e, (u,), node=node, labels=tuple(labels))

    @classmethod
    def ramification(cls, e: str, u: str, above: ExtensionKind) -> ExtensionKind:
        """New branch e at ramification point u, extending the tree above u by ``above``."""
        return cls(ExtensionTag.RAMIFICATION, e, (u,), above=above)

    def describe(self) -> str:
        """Short readable form."""
        if self.tag is ExtensionTag.STAR:
            return f"Star(hub {self.vertex} at {format_node(self.node)})"
        if self.tag is ExtensionTag.DYADIC:
            return f"Dyadic({self.vertex} between {self.neighbours[0]},{self.neighbours[1]})"
        if self.tag is ExtensionTag.RAMIFICATION:
            return f"Ramification({self.vertex} at {self.neighbours[0]}; {self.above.describe()})"
        if self.tag is ExtensionTag.TERNARY:
            return f"Ternary({self.vertex} at {self.neighbours[0]}, node {format_node(self.node)})"
        return f"Leaf({self.vertex} attached to {self.neighbours[0]})"


def extend(a: TreeOfBSets, kind: ExtensionKind) -> TreeOfBSets:
    """Apply an extension recipe to the root of a.

    Raises:
        ExtensionError: If the recipe does not fit a or the result does not validate.
    """
    try:
        result = _apply(a, kind)
    except ExtensionError:
        raise
    except ValueError as e:
        msg = f"{kind.describe()} does not apply: {e}"
        raise ExtensionError(msg) from e
    report = validate(result)
    if not report.ok:
        msg = f"{kind.describe()} produced an invalid tree: {report.problems[0]}"
        raise ExtensionError(msg)
    logger.debug("applied %s", kind.describe())
    return result


def _apply(a: TreeOfBSets, kind: ExtensionKind) -> TreeOfBSets:
    if kind.tag is ExtensionTag.STAR:
        return _apply_star(a, kind)
    root, b, e = a.root, a.root_bset, kind.vertex
    if e in b.vertices:
        msg = f"vertex {e!r} already exists at the root"
        raise ExtensionError(msg)
    u = kind.neighbours[0]
    bsets = dict(a.bsets)
    f = {s: dict(kids) for s, kids in a.f.items()}
    g = {edge: dict(m) for edge, m in a.g.items()}
    edges = set(b.sorted_edges())
    replaced_child = None

    if kind.tag is ExtensionTag.LEAF:
        if b.degree(u) > 1:
            msg = f"{u!r} is not a leaf"
            raise ExtensionError(msg)
        edges.add((e, u))
    elif kind.tag is ExtensionTag.DYADIC:
        v = kind.neighbours[1]
        if (u, v) not in edges:
            msg = f"{u!r}-{v!r} is not an edge"
            raise ExtensionError(msg)
        edges -= {(u, v)}
        edges |= {(e, u), (e, v)}
    elif kind.tag is ExtensionTag.TERNARY:
        if b.degree(u) != 2:  # noqa: PLR2004
            msg = f"{u!r} is not dyadic"
            raise ExtensionError(msg)
        edges.add((e, u))
    else:
        if b.degree(u) < 3:  # noqa: PLR2004
            msg = f"{u!r} is not a ramification point"
            raise ExtensionError(msg)
        edges.add((e, u))
    new_root = BSet.from_edges([*b.vertices, e], edges)
    bsets[root] = new_root

    for t in a.children(root):
        w = a.f[root][t]
        if kind.tag is ExtensionTag.RAMIFICATION and w == u:
            replaced_child = t
            continue
        source = kind.neighbours[1] if kind.tag is ExtensionTag.DYADIC and u == w else u
        g[(root, t)][e] = g[(root, t)][source]

    if kind.tag is ExtensionTag.TERNARY:
        node = kind.node
        if node in a.bsets or not node_lt(root, node):
            msg = f"ternary node {format_node(node)} must be new and above the root"
            raise ExtensionError(msg)
        reps = [rep for rep, _ in kind.labels]
        labels = [label for _, label in kind.labels]
        if len(set(labels)) != 3:  # noqa: PLR2004
            msg = "ternary labels must be distinct"
            raise ExtensionError(msg)
        by_branch = {}
        for rep, label in kind.labels:
            by_branch[branch_containing(new_root, u, rep)] = label
        if len(by_branch) != 3:  # noqa: PLR2004
            msg = f"ternary representatives {reps} do not hit the three branches at {u!r}"
            raise ExtensionError(msg)
        bsets[node] = BSet.path(*labels)
        f.setdefault(root, {})[node] = u
        g[(root, node)] = {x: label for component, label in by_branch.items() for x in component}

    if kind.tag is ExtensionTag.RAMIFICATION:
        t = replaced_child
        sub = restrict_above(a, t)
        grown = _apply(sub, kind.above)
        for x in sub.nodes:
            del bsets[x]
            f.pop(x, None)
        for edge in list(g):
            if edge[0] in sub.bsets or edge == (root, t):
                del g[edge]
        bsets.update(grown.bsets)
        f.update({s: dict(kids) for s, kids in grown.f.items()})
        g.update({edge: dict(m) for edge, m in grown.g.items()})
        old = a.g[(root, t)]
        if kind.above.tag is ExtensionTag.STAR:
            leaf_of = dict(kind.above.labels)
            collapse = {x: leaf_of[y] for x, y in old.items()}
        else:
            collapse = dict(old)
        collapse[e] = kind.above.vertex
        del f[root][t]
        f[root][grown.root] = u
        g[(root, grown.root)] = collapse

    return TreeOfBSets(a.chain, bsets, f, g)


def _apply_star(a: TreeOfBSets, kind: ExtensionKind) -> TreeOfBSets:
    root, b = a.root, a.root_bset
    node, hub = kind.node, kind.vertex
    if node in a.bsets or not node_lt(node, root) or ancestor_at(root, node.colour) != node:
        msg = f"star node {format_node(node)} must lie strictly below the root on its chain"
        raise ExtensionError(msg)
    if len(b) < 3:  # noqa: PLR2004
        msg = "a star needs at least three root vertices"
        raise ExtensionError(msg)
    leaf_of = dict(kind.labels)
    leaves = list(leaf_of.values())
    if set(leaf_of) != b.vertices or len(set(leaves)) != len(leaves) or hub in leaves:
        msg = "star labels must give each root vertex its own leaf id"
        raise ExtensionError(msg)
    bsets = {**a.bsets, node: BSet.star(hub, leaves)}
    f = {**a.f, node: {root: hub}}
    g = {**a.g, (node, root): {leaf: old for old, leaf in leaf_of.items()}}
    return TreeOfBSets(a.chain, bsets, f, g)


def classify_extension(a: TreeOfBSets, e: TreeOfBSets) -> ExtensionKind:
    """Recognise e as a one-point extension of a and return its exact recipe.

    ``extend(a, classify_extension(a, e)) == e`` holds for every valid pair.

    Raises:
        ExtensionError: If a is not strong in e or e is not one vertex larger.
    """
    if not is_strong_substructure(a, e):
        msg = "not a strong substructure"
        raise ExtensionError(msg)
    if len(e.domain) != len(a.domain) + 1:
        msg = "not a one-point extension: the root B-set must grow by exactly one vertex"
        raise ExtensionError(msg)
    kind = _classify(a, e)
    if extend(a, kind) != e:
        msg = f"{kind.describe()} does not reproduce the extension"
        raise ExtensionError(msg)
    return kind


def _classify(a: TreeOfBSets, e: TreeOfBSets) -> ExtensionKind:
    r = a.root
    if e.root != r:
        hub = e.f[e.root][r] if r in e.f.get(e.root, {}) else None
        if hub is None or set(e.nodes) != {*a.nodes, e.root}:
            msg = "root dropped by more than a star"
            raise ExtensionError(msg)
        collapse = e.g[(e.root, r)]
        return ExtensionKind.star(e.root, hub, {old: leaf for leaf, old in collapse.items()})
    rb_a, rb_e = a.root_bset, e.root_bset
    (new,) = rb_e.vertices - rb_a.vertices
    valency = rb_e.degree(new)
    if valency == 2:  # noqa: PLR2004
        u, v = rb_e.neighbours(new)
        return ExtensionKind.dyadic(new, u, v)
    if valency != 1:
        msg = f"new vertex {new!r} has valency {valency}"
        raise ExtensionError(msg)
    (u,) = rb_e.neighbours(new)
    degree = rb_a.degree(u)
    if degree <= 1:
        return ExtensionKind.leaf(new, u)
    if degree == 2:  # noqa: PLR2004
        node = child_at(e, r, u)
        if node is None:
            msg = f"no node above {u!r}"
            raise ExtensionError(msg)
        return ExtensionKind.ternary(new, u, node, ternary_labels(e, r, node, [*rb_a.neighbours(u), new]))
    t_a, t_e = child_at(a, r, u), child_at(e, r, u)
    above = _classify(restrict_above(a, t_a), restrict_above(e, t_e))
    return ExtensionKind.ramification(new, u, above)


def ternary_labels(
    e: TreeOfBSets,
    r: AmbientNode,
    node: AmbientNode,
    reps: list[str],
) -> list[tuple[str, str]]:
    """Pair three representatives with their labels at node, in path order from the lesser end."""
    comp = g_composite(e, r, node)
    label_of = {comp[rep]: rep for rep in reps}
    if len(label_of) != 3:  # noqa: PLR2004
        msg = "representatives do not reach three distinct labels"
        raise ExtensionError(msg)
    b = e.bsets[node]
    x, y, z = sorted(label_of)
    middle = next((m for m, p, q in ((x, y, z), (y, x, z), (z, x, y)) if between(b, m, p, q)), None)
    if middle is None:
        msg = f"labels {sorted(label_of)} are not linear at {format_node(node)}"
        raise ExtensionError(msg)
    ends = sorted({x, y, z} - {middle})
    return [(label_of[lab], lab) for lab in (ends[0], middle, ends[1])]
