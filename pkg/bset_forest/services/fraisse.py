"""Isomorphism classes, the chain construction and the derived C-relation.

Canonical forms encode each B-set by rooting it at its centres and hashing subtrees
bottom-up; a vertex carrying a child node also encodes that node, with the child's vertices
annotated by the code of the branch collapsing onto them. Two valid instances get the same
form exactly when an internal arboreal isomorphism exists.
"""

from __future__ import annotations

import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import networkx as nx

from bset_forest.core.ambient_tree import ChainPreset, ColorChain, default_window
from bset_forest.core.bset_core import TernaryRelation, between
from bset_forest.data.forest import child_at, pre_branches, pre_set
from bset_forest.services.amalgam import decompose_steps, extend_along, joint_embed
from bset_forest.services.extensions import extend
from bset_forest.services.generators import InstanceBounds, one_point_extensions, random_extension, seed_instance
from bset_forest.services.morphisms import (
    ArborealMorphism,
    MorphismError,
    MorphismKind,
    check,
    inclusion,
    is_strong_substructure,
    lift_embedding,
    root_isomorphisms,
)
from bset_forest.services.stage_machine import (
    DEFER,
    DISCHARGE,
    ChainStageMachine,
    ChainTask,
    DeferReason,
    TaskType,
)

if TYPE_CHECKING:
    from collections.abc import Iterator, Mapping

    from bset_forest.core.ambient_tree import AmbientNode
    from bset_forest.core.bset_core import BSet
    from bset_forest.data.models import TreeOfBSets

logger = logging.getLogger(__name__)

EMBEDDING_SEARCH_LIMIT = 5000


class FraisseError(ValueError):
    """Raised for invalid inputs to the chain and extension checks."""


# Canonical forms


def _node_code(a: TreeOfBSets, t: AmbientNode, annotation: Mapping[str, str]) -> str:
    b = a.bsets[t]
    colour = a.chain.format_colour(t.colour)
    best = None
    for centre in nx.center(b.graph):
        code = _rooted_code(a, t, centre, None, annotation)
        if best is None or code < best:
            best = code
    return f"[{colour}{best}]"


def _rooted_code(a: TreeOfBSets, t: AmbientNode, v: str, parent: str | None, annotation: Mapping[str, str]) -> str:
    b = a.bsets[t]
    kids = {w: _rooted_code(a, t, w, v, annotation) for w in b.neighbours(v) if w != parent}
    above = ""
    child = child_at(a, t, v)
    if child is not None:
        collapse = a.g[(t, child)]
        marks = {}
        for w in b.neighbours(v):
            label = collapse[w]
            marks[label] = "^" if w == parent else kids[w]
        above = _node_code(a, child, marks)
    return "(" + annotation.get(v, "") + "|" + above + "|" + "".join(sorted(kids.values())) + ")"


def canonical_form(a: TreeOfBSets) -> str:
    """A string equal for two instances iff they are internally isomorphic."""
    return _node_code(a, a.root, {})


def isomorphisms(a1: TreeOfBSets, a2: TreeOfBSets) -> list[ArborealMorphism]:
    """Every internal arboreal isomorphism a1 -> a2."""
    if a1.root.colour != a2.root.colour or a1.size() != a2.size():
        return []
    found = []
    for psi in root_isomorphisms(a1.root_bset, a2.root_bset):
        try:
            found.append(lift_embedding(a1, a2, a2.root, psi, MorphismKind.ISOMORPHISM))
        except MorphismError:
            continue
    return found


def are_isomorphic(a1: TreeOfBSets, a2: TreeOfBSets) -> ArborealMorphism | None:
    """An internal isomorphism a1 -> a2, or None."""
    if canonical_form(a1) != canonical_form(a2):
        return None
    for psi in root_isomorphisms(a1.root_bset, a2.root_bset):
        try:
            return lift_embedding(a1, a2, a2.root, psi, MorphismKind.ISOMORPHISM)
        except MorphismError:
            continue
    msg = "canonical forms agree but no isomorphism lifts"
    raise FraisseError(msg)


# Enumeration


@dataclass(frozen=True)
class ClassBounds(InstanceBounds):
    """Bounds for enumerating isomorphism classes."""


def enumerate_classes(chain: ColorChain, bounds: ClassBounds) -> list[TreeOfBSets]:
    """One representative per isomorphism class within the bounds.

    Every valid instance is reached from a single vertex at its root colour by root
    extensions, so growth starts from one-vertex seeds and never adds a star below the root.
    Representatives are ordered by node count, root size, then canonical form.
    """
    colours = bounds.window(chain)
    seen: dict[str, TreeOfBSets] = {}
    frontier = []
    for c in colours:
        seed = seed_instance(chain, c)
        seen[canonical_form(seed)] = seed
        frontier.append(seed)
    while frontier:
        grown = []
        for a in frontier:
            for e in one_point_extensions(a, colours, bounds, stars=False):
                key = canonical_form(e)
                if key not in seen:
                    seen[key] = e
                    grown.append(e)
        frontier = grown
    ordered = sorted(seen.items(), key=lambda item: (*item[1].size(), item[0]))
    logger.info("enumerated %d classes", len(ordered))
    return [a for _, a in ordered]


# Strong embeddings


def _root_maps(
    b1: BSet,
    b2: BSet,
    fixed: Mapping[str, str] | None = None,
    limit: int = EMBEDDING_SEARCH_LIMIT,
) -> Iterator[dict[str, str]]:
    """Injections b1 -> b2 preserving and reflecting betweenness, extending ``fixed``."""
    order = list(nx.bfs_tree(b1.graph, b1.sorted_vertices()[0]))
    targets = b2.sorted_vertices()
    budget = [limit]

    def consistent(partial: dict[str, str], x: str) -> bool:
        placed = [y for y in partial if y != x]
        for y, z in itertools.permutations(placed, 2):
            triples = ((x, y, z), (y, x, z), (z, x, y))
            for p, q, r in triples:
                if between(b1, p, q, r) != between(b2, partial[p], partial[q], partial[r]):
                    return False
        return True

    def extend_map(partial: dict[str, str], i: int) -> Iterator[dict[str, str]]:
        if budget[0] <= 0:
            return
        if i == len(order):
            yield dict(partial)
            return
        x = order[i]
        used = set(partial.values())
        options = [fixed[x]] if fixed and x in fixed else [w for w in targets if w not in used]
        for w in options:
            if w in used:
                continue
            budget[0] -= 1
            partial[x] = w
            if consistent(partial, x):
                yield from extend_map(partial, i + 1)
            del partial[x]

    yield from extend_map({}, 0)


def strong_embeddings(b: TreeOfBSets, a: TreeOfBSets, limit: int = EMBEDDING_SEARCH_LIMIT) -> Iterator[ArborealMorphism]:
    """Strong embeddings of b into a, found by root maps and lifting."""
    for node in a.nodes:
        if node.colour != b.root.colour:
            continue
        for root_map in _root_maps(b.root_bset, a.bsets[node], limit=limit):
            try:
                yield lift_embedding(b, a, node, root_map)
            except MorphismError:
                continue


def check_extension_property(
    a_n: TreeOfBSets,
    b: TreeOfBSets,
    e: TreeOfBSets,
    mu: ArborealMorphism,
) -> ArborealMorphism | None:
    """A strong embedding of e into a_n restricting to mu on b, if one exists.

    Raises:
        FraisseError: If b is not strong in e or mu fails its check.
    """
    if not is_strong_substructure(b, e):
        msg = "b is not a strong substructure of e"
        raise FraisseError(msg)
    report = check(mu, b, a_n)
    if not report.ok:
        msg = f"mu is not a strong embedding: {report.problems[0]}"
        raise FraisseError(msg)
    if e == b:
        return mu
    via = inclusion(b, e)
    fixed = mu.phi[b.root] if e.root == b.root else None
    for node in a_n.nodes:
        if node.colour != e.root.colour:
            continue
        if fixed is not None and node != mu.tau[b.root]:
            continue
        for root_map in _root_maps(e.root_bset, a_n.bsets[node], fixed):
            try:
                candidate = lift_embedding(e, a_n, node, root_map)
            except MorphismError:
                continue
            if via.then(candidate) == mu:
                return candidate
    return None


# Chain construction


@dataclass(frozen=True)
class ChainConfig:
    """Settings for a finite run of the chain construction.

    ``max_nodes`` and ``max_root`` bound the listed classes; ``chain_cap`` bounds the root
    size of chain members, and tasks that would exceed it are deferred.
    """

    chain: ColorChain = field(default_factory=lambda: ColorChain(ChainPreset.RATIONALS))
    steps: int = 10
    seed: int = 0
    max_nodes: int = 2
    max_root: int = 4
    window: int = 2
    chain_cap: int = 16


@dataclass(frozen=True)
class ExtensionTask:
    """A discharged extension task: mu embeds b into the member, grown is e's embedding after."""

    step: int
    b: TreeOfBSets
    e: TreeOfBSets
    mu: ArborealMorphism
    grown: ArborealMorphism


@dataclass
class ChainResult:
    """Members A0 <= ... <= AN with their inclusions and the step log."""

    members: list[TreeOfBSets]
    inclusions: list[ArborealMorphism]
    log: list[str]
    tasks: list[ChainTask]
    discharged: list[ExtensionTask]


def build_chain(cfg: ChainConfig) -> ChainResult:
    """Run the alternating joint-embedding / extension schedule for ``cfg.steps`` stages."""
    rng = random.Random(cfg.seed)
    colours = default_window(cfg.chain, cfg.window)
    bounds = ClassBounds(cfg.max_nodes, cfg.max_root, colours)
    listing = enumerate_classes(cfg.chain, bounds)
    machine = ChainStageMachine()
    current = listing[0]
    members, inclusions, discharged = [current], [], []
    window_text = ",".join(cfg.chain.format_colour(c) for c in colours)
    log = [f"chain preset={cfg.chain.name} seed={cfg.seed} window={window_text} classes={len(listing)}"]

    for step in range(1, cfg.steps + 1):
        if step % 2:
            b = listing[(step // 2) % len(listing)]
            task = machine.schedule(step, TaskType.JOINT, f"joint with class {listing.index(b)}")
            grown = _joint_task(current, b, cfg, task)
        else:
            b = rng.choice(listing)
            e = random_extension(rng, b, rng.randint(1, 2), bounds)
            task = machine.schedule(step, TaskType.EXTEND, "extend an embedding")
            grown, record = _extend_task(current, b, e, cfg, task)
            if record is not None:
                discharged.append(record)
        if grown is None:
            machine.transition(task, DEFER)
            grown = current
        else:
            machine.transition(task, DISCHARGE)
        inclusion_map = inclusion(current, grown)
        report = check(inclusion_map, current, grown)
        if not report.ok:
            msg = f"step {step}: member is not strong in its successor: {report.problems[0]}"
            raise FraisseError(msg)
        current = grown
        members.append(current)
        inclusions.append(inclusion_map)
        nodes, root = current.size()
        line = f"step {step} task={task.task_type.name.lower()} status={task.state.name.lower()} sizes={nodes},{root}"
        if task.reason is not None:
            line += f" reason={task.reason.name.lower()}"
        log.append(line)
    return ChainResult(members, inclusions, log, machine.tasks, discharged)


def _joint_task(current: TreeOfBSets, b: TreeOfBSets, cfg: ChainConfig, task: ChainTask) -> TreeOfBSets | None:
    if len(current.domain) + max(len(b.domain), 3) > cfg.chain_cap:
        logger.info("joint task deferred: root would exceed %d vertices", cfg.chain_cap)
        task.reason = DeferReason.ROOT_CAP
        return None
    joint, _, _ = joint_embed(current, b, anchor_first=True)
    return joint


def _extend_task(
    current: TreeOfBSets,
    b: TreeOfBSets,
    e: TreeOfBSets,
    cfg: ChainConfig,
    task: ChainTask,
) -> tuple[TreeOfBSets | None, ExtensionTask | None]:
    mu = next(strong_embeddings(b, current), None)
    if mu is None:
        logger.info("extension task deferred: class does not embed strongly")
        task.reason = DeferReason.NO_EMBEDDING
        return None, None
    steps = decompose_steps(b, e)
    if len(current.domain) + len(steps) > cfg.chain_cap:
        logger.info("extension task deferred: root would exceed %d vertices", cfg.chain_cap)
        task.reason = DeferReason.ROOT_CAP
        return None, None
    d, nu, base = current, mu, b
    for kind in steps:
        d, nu = extend_along(nu, base, kind, d)
        base = extend(base, kind)
    return d, ExtensionTask(task.step, b, e, mu, nu)


# C-relations from pre-branches


def pre_branch_family(a: TreeOfBSets, p: str) -> list[frozenset[str]]:
    """Pre-branches omitting p, over every node whose pre-set contains p."""
    if p not in a.domain:
        msg = f"unknown element {p!r}"
        raise FraisseError(msg)
    family: set[frozenset[str]] = set()
    for t in a.nodes:
        if p not in pre_set(a, t):
            continue
        for v in a.bsets[t].sorted_vertices():
            family.update(gamma for gamma in pre_branches(a, t, v) if p not in gamma)
    return sorted(family, key=lambda s: (len(s), sorted(s)))


def derive_c_relation(a: TreeOfBSets, p: str) -> TernaryRelation:
    """C(x;y,z) iff some pre-branch omitting p holds y and z but not x, on M without p."""
    family = pre_branch_family(a, p)
    domain = a.domain - {p}
    triples = frozenset(
        (x, y, z)
        for x, y, z in itertools.product(sorted(domain), repeat=3)
        if any(y in gamma and z in gamma and x not in gamma for gamma in family)
    )
    return TernaryRelation(domain, triples)


def typical_pair(family: list[frozenset[str]]) -> tuple[frozenset[str], frozenset[str]] | None:
    """A pair that overlaps without nesting, if the family has one."""
    for gamma, delta in itertools.combinations(family, 2):
        if gamma - delta and delta - gamma and gamma & delta:
            return gamma, delta
    return None


def has_typical_pair(family: list[frozenset[str]]) -> bool:
    """True iff two members overlap without nesting."""
    return typical_pair(family) is not None
