"""Arboreal isomorphisms and strong embeddings between trees of B-sets.

A morphism is a node map ``tau`` with a vertex map ``phi[s]`` per node. Given where the root
goes and how its B-set maps, the rest of a strong embedding is forced: each child sits at
the image of its ramification point and climbs through separating vertices until its
colour is reached. ``lift_embedding`` computes that unique extension.
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum, auto
from typing import TYPE_CHECKING

from networkx.algorithms.isomorphism import GraphMatcher

from bset_forest.core.ambient_tree import node_leq, node_meet
from bset_forest.core.bset_core import TripleShape, branches_at, centroid, is_strong_embedding
from bset_forest.data.forest import child_at, compute_l, f_general, g_composite
from bset_forest.data.models import TreeOfBSets

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping

    from bset_forest.core.ambient_tree import AmbientNode
    from bset_forest.core.bset_core import BSet, Triple

logger = logging.getLogger(__name__)

AUTOMORPHISM_GUARD = 9


class MorphismError(ValueError):
    """Raised when a morphism cannot be built or fails its checks."""


class MorphismKind(Enum):
    """Isomorphism or strong embedding."""

    ISOMORPHISM = auto()
    STRONG_EMBEDDING = auto()


@dataclass(frozen=True, eq=False)
class ArborealMorphism:
    """Node map tau plus per-node vertex maps phi."""

    tau: Mapping[AmbientNode, AmbientNode]
    phi: Mapping[AmbientNode, Mapping[str, str]]
    kind: MorphismKind = MorphismKind.STRONG_EMBEDDING

    def __post_init__(self) -> None:
        """Copy the maps."""
        object.__setattr__(self, "tau", dict(self.tau))
        object.__setattr__(self, "phi", {t: dict(m) for t, m in self.phi.items()})

    def __eq__(self, other: object) -> bool:
        """Node-wise equality of tau and phi."""
        if not isinstance(other, ArborealMorphism):
            return NotImplemented
        return self.tau == other.tau and self.phi == other.phi

    __hash__ = None  # type: ignore[assignment]

    def then(self, other: ArborealMorphism) -> ArborealMorphism:
        """Composite: apply self, then other."""
        kind = (
            MorphismKind.ISOMORPHISM
            if self.kind is other.kind is MorphismKind.ISOMORPHISM
            else MorphismKind.STRONG_EMBEDDING
        )
        return ArborealMorphism(
            {t: other.tau[u] for t, u in self.tau.items()},
            {t: {x: other.phi[self.tau[t]][y] for x, y in m.items()} for t, m in self.phi.items()},
            kind,
        )

    def inverse(self) -> ArborealMorphism:
        """Inverse of an isomorphism."""
        if self.kind is not MorphismKind.ISOMORPHISM:
            msg = "only isomorphisms invert"
            raise MorphismError(msg)
        return ArborealMorphism(
            {u: t for t, u in self.tau.items()},
            {self.tau[t]: {y: x for x, y in m.items()} for t, m in self.phi.items()},
            MorphismKind.ISOMORPHISM,
        )

    def restrict(self, a: TreeOfBSets) -> ArborealMorphism:
        """Restriction to a substructure of the source, kept as a strong embedding."""
        return ArborealMorphism(
            {t: self.tau[t] for t in a.nodes},
            {t: {v: self.phi[t][v] for v in a.bsets[t].vertices} for t in a.nodes},
            MorphismKind.STRONG_EMBEDDING,
        )


@dataclass
class CheckReport:
    """Problems found by check; empty when the morphism is valid."""

    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        """True iff no clause failed."""
        return not self.problems


def check(m: ArborealMorphism, a1: TreeOfBSets, a2: TreeOfBSets) -> CheckReport:
    """Verify every clause of an arboreal isomorphism or strong embedding."""
    report = CheckReport()
    problems = report.problems
    if set(m.tau) != set(a1.nodes) or not set(m.tau.values()) <= set(a2.nodes):
        problems.append("tau must map the source nodes into the target nodes")
        return report
    if set(m.phi) != set(a1.nodes):
        problems.append("phi must be given at every source node")
        return report
    if m.kind is MorphismKind.ISOMORPHISM and len(set(m.tau.values())) != len(a2.nodes):
        problems.append("tau is not a bijection")
    for t in a1.nodes:
        if t.colour != m.tau[t].colour:
            problems.append(f"tau changes the colour at {t}")
    for s, t in itertools.combinations(a1.nodes, 2):
        ts, tt = m.tau[s], m.tau[t]
        if node_leq(s, t) != node_leq(ts, tt) or node_leq(t, s) != node_leq(tt, ts):
            problems.append(f"tau does not preserve the order between {s} and {t}")
        if m.tau.get(node_meet(s, t)) != node_meet(ts, tt):
            problems.append(f"tau does not preserve the meet of {s} and {t}")
    if problems:
        return report
    for t in a1.nodes:
        phi, source, target = m.phi[t], a1.bsets[t], a2.bsets[m.tau[t]]
        if not is_strong_embedding(source, target, phi):
            problems.append(f"phi at {t} is not a strong embedding")
        elif m.kind is MorphismKind.ISOMORPHISM and len(target) != len(source):
            problems.append(f"phi at {t} is not onto")
    if problems:
        return report
    for s in a1.nodes:
        for t in a1.children(s):
            ts, tt = m.tau[s], m.tau[t]
            if m.phi[s][a1.f[s][t]] != f_general(a2, ts, tt):
                problems.append(f"f is not coherent on the edge {s} -> {t}")
                continue
            comp = g_composite(a2, ts, tt)
            for x, y in a1.g[(s, t)].items():
                image = m.phi[s][x]
                if comp.get(image) != m.phi[t][y]:
                    problems.append(f"g is not coherent on the edge {s} -> {t} at {x!r}")
                    break
    return report


def _separator(b: BSet, images: list[str]) -> str | None:
    """The vertex putting every image in its own branch, if there is one."""
    if len(images) < 3 or len(set(images)) != len(images):  # noqa: PLR2004
        return None
    centre = centroid(b, images[0], images[1], images[2])
    if centre.shape is TripleShape.LINEAR:
        return None
    w = centre.vertex
    seen = set()
    for component in branches_at(b, w):
        hits = component.intersection(images)
        if len(hits) > 1:
            return None
        seen |= hits
    return w if len(seen) == len(images) else None


def lift_embedding(
    a1: TreeOfBSets,
    a2: TreeOfBSets,
    root_target: AmbientNode,
    root_map: Mapping[str, str],
    kind: MorphismKind = MorphismKind.STRONG_EMBEDDING,
) -> ArborealMorphism:
    """Extend root data to the unique arboreal morphism a1 -> a2 it determines.

    Args:
        a1: Source tree of B-sets
        a2: Target tree of B-sets
        root_target: Node of a2 receiving the root of a1
        root_map: Vertex map from the root B-set of a1 into B(root_target)
        kind: Isomorphism or strong embedding

    Returns:
        ArborealMorphism: The lifted morphism, already checked

    Raises:
        MorphismError: If the root data does not extend.
    """
    a2.require(root_target)
    tau = {a1.root: root_target}
    phi = {a1.root: dict(root_map)}
    queue = deque([a1.root])
    while queue:
        s = queue.popleft()
        for t in a1.children(s):
            hub = phi[s].get(a1.f[s][t])
            node = child_at(a2, tau[s], hub) if hub is not None else None
            if node is None:
                msg = f"no target child above {tau[s]} at {hub!r}"
                raise MorphismError(msg)
            gmap = a1.g[(s, t)]
            reps = {y: min(x for x, image in gmap.items() if image == y) for y in a1.bsets[t].vertices}
            step = a2.g[(tau[s], node)]
            images = {y: step[phi[s][x]] for y, x in reps.items()}
            while node.colour < t.colour:
                w = _separator(a2.bsets[node], sorted(images.values()))
                above = child_at(a2, node, w) if w is not None else None
                if above is None:
                    msg = f"images of B({t}) do not separate at {node}"
                    raise MorphismError(msg)
                step = a2.g[(node, above)]
                images = {y: step[v] for y, v in images.items()}
                node = above
            if node.colour != t.colour:
                msg = f"no target node of colour {t.colour} above {tau[s]}"
                raise MorphismError(msg)
            tau[t] = node
            phi[t] = images
            queue.append(t)
    m = ArborealMorphism(tau, phi, kind)
    report = check(m, a1, a2)
    if not report.ok:
        raise MorphismError(report.problems[0])
    return m


def identity(a: TreeOfBSets) -> ArborealMorphism:
    """Identity isomorphism."""
    return ArborealMorphism(
        {t: t for t in a.nodes},
        {t: {v: v for v in a.bsets[t].vertices} for t in a.nodes},
        MorphismKind.ISOMORPHISM,
    )


def inclusion(a: TreeOfBSets, e: TreeOfBSets) -> ArborealMorphism:
    """Inclusion of a substructure given by shared nodes and ids."""
    del e
    return ArborealMorphism(
        {t: t for t in a.nodes},
        {t: {v: v for v in a.bsets[t].vertices} for t in a.nodes},
        MorphismKind.STRONG_EMBEDDING,
    )


def is_strong_substructure(a: TreeOfBSets, e: TreeOfBSets) -> bool:
    """True iff a sits inside e with the same nodes and ids as a strong substructure."""
    if not set(a.nodes) <= set(e.nodes):
        return False
    if any(not a.bsets[t].vertices <= e.bsets[t].vertices for t in a.nodes):
        return False
    return check(inclusion(a, e), a, e).ok


def image(m: ArborealMorphism, a1: TreeOfBSets, a2: TreeOfBSets) -> TreeOfBSets:
    """The substructure m(a1) of a2, in a2's nodes and ids."""
    bsets = {m.tau[t]: a1.bsets[t].relabel(m.phi[t]) for t in a1.nodes}
    f = {m.tau[s]: {m.tau[t]: m.phi[s][v] for t, v in kids.items()} for s, kids in a1.f.items()}
    g = {
        (m.tau[s], m.tau[t]): {m.phi[s][x]: m.phi[t][y] for x, y in gmap.items()}
        for (s, t), gmap in a1.g.items()
    }
    return TreeOfBSets(a2.chain, bsets, f, g)


def induced_l_map(m: ArborealMorphism, a1: TreeOfBSets, a2: TreeOfBSets) -> dict[str, str]:
    """Map M1 -> M2 sending a to the least member of the fiber over phi_r(a)."""
    report = check(m, a1, a2)
    if not report.ok:
        raise MorphismError(report.problems[0])
    comp = g_composite(a2, a2.root, m.tau[a1.root])
    psi = {}
    for a in a1.domain:
        target = m.phi[a1.root][a]
        psi[a] = min(x for x, y in comp.items() if y == target)
    return psi


def l_iso_to_arboreal(a1: TreeOfBSets, a2: TreeOfBSets, psi: Mapping[str, str]) -> ArborealMorphism:
    """Lift an L-isomorphism between root domains to an arboreal isomorphism.

    Raises:
        MorphismError: If psi is not an L-isomorphism or does not respect the root B-sets.
    """
    psi = dict(psi)
    if set(psi) != set(a1.domain) or set(psi.values()) != set(a2.domain):
        msg = "psi must be a bijection between the root domains"
        raise MorphismError(msg)
    if compute_l(a1).relabel(psi) != compute_l(a2):
        msg = "psi does not preserve L"
        raise MorphismError(msg)
    if a1.root_bset.relabel(psi) != a2.root_bset:
        msg = "psi does not map the root B-relation onto the target's"
        raise MorphismError(msg)
    if a1.root.colour != a2.root.colour:
        msg = "root colours differ"
        raise MorphismError(msg)
    return lift_embedding(a1, a2, a2.root, psi, MorphismKind.ISOMORPHISM)


def root_isomorphisms(b1: BSet, b2: BSet) -> Iterable[dict[str, str]]:
    """Tree isomorphisms between two B-sets, via networkx VF2."""
    if len(b1) != len(b2):
        return iter(())
    return GraphMatcher(b1.graph, b2.graph).isomorphisms_iter()


def automorphisms(a: TreeOfBSets) -> list[ArborealMorphism]:
    """All arboreal automorphisms, ordered by their root permutation."""
    if len(a.domain) > AUTOMORPHISM_GUARD:
        msg = f"automorphism search is limited to {AUTOMORPHISM_GUARD} root vertices"
        raise MorphismError(msg)
    found = []
    for psi in root_isomorphisms(a.root_bset, a.root_bset):
        try:
            found.append(l_iso_to_arboreal(a, a, psi))
        except MorphismError:
            logger.debug("root symmetry %s does not lift", psi)
    order = sorted(a.domain)
    found.sort(key=lambda m: tuple(m.phi[a.root][v] for v in order))
    return found


def triple_orbits(a: TreeOfBSets) -> list[frozenset[Triple]]:
    """Orbits of ordered distinct triples of M under the automorphism group."""
    maps = [m.phi[a.root] for m in automorphisms(a)]
    remaining = set(itertools.permutations(sorted(a.domain), 3))
    orbits = []
    while remaining:
        seed = min(remaining)
        orbit = frozenset((p[seed[0]], p[seed[1]], p[seed[2]]) for p in maps)
        orbits.append(orbit)
        remaining -= orbit
    return orbits


def symmetric_orbit_union(a: TreeOfBSets) -> frozenset[Triple]:
    """Union of the orbits closed under swapping the last two entries."""
    union: set[Triple] = set()
    for orbit in triple_orbits(a):
        if all((x, z, y) in orbit for x, y, z in orbit):
            union |= orbit
    return frozenset(union)
