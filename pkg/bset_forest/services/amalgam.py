"""Amalgamation of trees of B-sets.

The workhorse is ``push``: given a strong substructure ``base`` of ``target`` and a one-point
extension recipe over ``base``, it produces recipes over ``target`` whose result contains the
extended base. Everything else is built from it:

- ``amalgamate_one_point`` identifies isomorphic pairs and otherwise pushes one extension
  into the other, recording which case of the construction applied;
- ``decompose`` splits a strong extension into one-point steps;
- ``amalgamate`` folds ``push`` along such a chain;
- ``joint_embed`` places two instances side by side above a new root.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum, auto
from typing import TYPE_CHECKING

from bset_forest.core.ambient_tree import (
    AmbientNode,
    ancestor_at,
    branch,
    color_below,
    fresh_branch,
    node_lt,
    transplant,
)
from bset_forest.core.bset_core import BSet, BSetError, branches_at, fresh_id, leaves, restrict
from bset_forest.data.forest import (
    chain_between,
    child_at,
    f_general,
    g_composite,
    restrict_above,
    validate,
)
from bset_forest.data.models import TreeOfBSets
from bset_forest.services.extensions import (
    ExtensionError,
    ExtensionKind,
    ExtensionTag,
    classify_extension,
    extend,
    ternary_labels,
)
from bset_forest.services.morphisms import (
    ArborealMorphism,
    MorphismError,
    MorphismKind,
    check,
    identity,
    image,
    inclusion,
    is_strong_substructure,
    lift_embedding,
)

if TYPE_CHECKING:
    from collections.abc import Iterable

logger = logging.getLogger(__name__)


class AmalgamError(ValueError):
    """Raised for inputs outside the construction's preconditions or a failed self-check."""


class AmalgamCase(Enum):
    """Which branch of the one-point construction produced an amalgam."""

    IDENTIFIED = auto()
    STAR_STAR = auto()
    STAR_ROOT = auto()
    DISJOINT = auto()
    TERNARY_SAME_COLOUR = auto()
    TERNARY_AUXILIARY = auto()
    RAMIFICATION_SHARED = auto()
    RAMIFICATION_STARS = auto()
    RAMIFICATION_MIXED = auto()

    # General amalgamation
    TRIVIAL = auto()
    COMPOSITE = auto()


@dataclass(frozen=True, eq=False)
class AmalgamResult:
    """An amalgam with the embeddings of both extensions and of the common base."""

    amalgam: TreeOfBSets
    emb1: ArborealMorphism
    emb2: ArborealMorphism
    over: ArborealMorphism
    case: AmalgamCase

    def commutes(self, a: TreeOfBSets, e1: TreeOfBSets, e2: TreeOfBSets) -> bool:
        """True iff both embeddings agree with ``over`` on a."""
        via1 = inclusion(a, e1).then(self.emb1)
        via2 = inclusion(a, e2).then(self.emb2)
        return via1 == self.over == via2


class _FreshIds:
    """Hands out reserved-prefix ids unused in a target tree."""

    def __init__(self, taken: Iterable[str]) -> None:
        self._taken = set(taken)

    def __call__(self) -> str:
        vertex = fresh_id(self._taken)
        self._taken.add(vertex)
        return vertex

    def claim(self, preferred: str | None) -> str:
        """The preferred id if it is still free, else a fresh one."""
        if preferred is not None and preferred not in self._taken:
            self._taken.add(preferred)
            return preferred
        return self()


@dataclass
class Placement:
    """Recipes over a target plus where the pushed extension lands.

    ``main`` is the id at the target's root level standing for the new vertex; it is
    introduced by ``kinds[main_index]`` or, when ``main_index`` is None, already exists.
    ``anchor`` receives the extended base's root and ``anchor_map`` sends the recipe's new
    ids there.
    """

    kinds: list[ExtensionKind]
    main_index: int | None
    main: str
    anchor: AmbientNode
    anchor_map: dict[str, str] = field(default_factory=dict)


def push(base: TreeOfBSets, kind: ExtensionKind, target: TreeOfBSets) -> Placement:
    """Carry a one-point extension of ``base`` over to recipes for ``target``.

    Args:
        base: A strong substructure of target, sharing its nodes and ids
        kind: A one-point extension recipe over base
        target: The tree to extend

    Returns:
        Placement: Recipes to apply to target in order, and the anchor data for lifting
        ``extend(base, kind)`` into the result
    """
    fresh = _FreshIds(target.all_ids())
    placement = _place(base, kind, target, fresh, kind.vertex)
    logger.debug("pushed %s as %s", kind.describe(), [k.describe() for k in placement.kinds])
    return placement


def _place(
    base: TreeOfBSets,
    kind: ExtensionKind,
    target: TreeOfBSets,
    fresh: _FreshIds,
    main_pref: str | None,
) -> Placement:
    if kind.tag is ExtensionTag.STAR:
        return _place_star(base, kind, target, fresh)
    r = base.root
    if target.root == r:
        return _place_root(base, kind, target, fresh, main_pref)
    placement = _place_root(base, kind, restrict_above(target, r), fresh, main_pref)
    anchor, anchor_map = placement.anchor, placement.anchor_map
    path = chain_between(target, target.root, r)
    for lower, upper in reversed(list(itertools.pairwise(path))):
        placement = _wrap(target, lower, upper, placement, fresh, None)
    placement.anchor, placement.anchor_map = anchor, anchor_map
    return placement


def _wrap(
    target: TreeOfBSets,
    lower: AmbientNode,
    upper: AmbientNode,
    inner: Placement,
    fresh: _FreshIds,
    main_pref: str | None,
) -> Placement:
    """Lift recipes for the tree above ``upper`` to ramification recipes at ``lower``."""
    hub = target.f[lower][upper]
    kinds = []
    for i, k in enumerate(inner.kinds):
        vertex = fresh.claim(main_pref) if i == inner.main_index else fresh()
        kinds.append(ExtensionKind.ramification(vertex, hub, k))
    if inner.main_index is not None:
        main = kinds[inner.main_index].vertex
    else:
        collapse = target.g[(lower, upper)]
        main = min(v for v in target.bsets[lower].neighbours(hub) if collapse.get(v) == inner.main)
    return Placement(kinds, inner.main_index, main, inner.anchor, inner.anchor_map)


def _place_root(
    base: TreeOfBSets,
    kind: ExtensionKind,
    target: TreeOfBSets,
    fresh: _FreshIds,
    main_pref: str | None,
) -> Placement:
    r = target.root
    big = target.root_bset
    u = kind.neighbours[0]

    def done(new_kind: ExtensionKind) -> Placement:
        return Placement([new_kind], 0, new_kind.vertex, r, {kind.vertex: new_kind.vertex})

    if kind.tag is ExtensionTag.LEAF:
        main = fresh.claim(main_pref)
        if big.degree(u) <= 1:
            return done(ExtensionKind.leaf(main, u))
        for component in branches_at(big, u):
            if not component & base.root_bset.vertices:
                z = min(v for v in component if big.degree(v) == 1)
                return done(ExtensionKind.leaf(main, z))
        msg = f"no free branch at {u!r}"
        raise AmalgamError(msg)

    if kind.tag is ExtensionTag.DYADIC:
        main = fresh.claim(main_pref)
        step = big.path_between(u, kind.neighbours[1])[1]
        return done(ExtensionKind.dyadic(main, u, step))

    if kind.tag is ExtensionTag.TERNARY:
        colour = kind.node.colour
        if big.degree(u) == 2:  # noqa: PLR2004
            main = fresh.claim(main_pref)
            node = fresh_branch(r, colour, target.nodes)
            labels = [(main if rep == kind.vertex else rep, label) for rep, label in kind.labels]
            return done(ExtensionKind.ternary(main, u, node, labels))
        above = child_at(target, r, u)
        collapse = target.g[(r, above)]
        order = [None if rep == kind.vertex else collapse[rep] for rep, _ in kind.labels]
        inner = _place_linear(restrict_above(target, above), order, colour, fresh)
        placement = _wrap(target, r, above, inner, fresh, main_pref)
    else:
        t_base, t_target = child_at(base, r, u), child_at(target, r, u)
        inner = _place(restrict_above(base, t_base), kind.above, restrict_above(target, t_target), fresh, None)
        placement = _wrap(target, r, t_target, inner, fresh, main_pref)
    placement.anchor = r
    placement.anchor_map = {kind.vertex: placement.main}
    return placement


def _attach_linear(b: BSet, order: list[str | None], new: str) -> ExtensionKind:
    """Add ``new`` to b so that the three ids sit on a path in the given order."""
    p, q = (x for x in order if x is not None)
    middle = order[1]
    if middle is None:
        step = b.path_between(p, q)[1]
        return ExtensionKind.dyadic(new, p, step)
    near, far = (p, q) if middle == p else (q, p)
    if b.degree(near) <= 1:
        return ExtensionKind.leaf(new, near)
    component = next(c for c in branches_at(b, near) if far not in c)
    return ExtensionKind.leaf(new, min(v for v in component if b.degree(v) == 1))


def _place_linear(sub: TreeOfBSets, order: list[str | None], colour: object, fresh: _FreshIds) -> Placement:
    """Recipes over sub making a node of the given colour see the two classes and a new one in order.

    ``order`` lists two root ids of sub and ``None`` for the new vertex, in path order.
    """
    rho = sub.root
    b = sub.root_bset
    p, q = (x for x in order if x is not None)
    main = fresh()

    def labelled() -> list[tuple[str, str]]:
        return [(main, main) if x is None else (x, x) for x in order]

    if rho.colour == colour:
        new_kind = _attach_linear(b, order, main)
        return Placement([new_kind], 0, main, rho)
    if rho.colour > colour:
        aux = fresh()
        star = ExtensionKind.star(ancestor_at(rho, colour), aux, {v: v for v in b.vertices})
        new_kind = _attach_linear(BSet.star(aux, b.sorted_vertices()), order, main)
        return Placement([star, new_kind], 1, main, rho)
    interior = b.path_between(p, q)[1:-1]
    dyadic_points = [w for w in interior if b.degree(w) == 2]  # noqa: PLR2004
    if dyadic_points:
        w = dyadic_points[0]
        node = fresh_branch(rho, colour, sub.nodes)
        return Placement([ExtensionKind.ternary(main, w, node, labelled())], 0, main, rho)
    if interior:
        w = interior[0]
        above = child_at(sub, rho, w)
        collapse = sub.g[(rho, above)]
        inner = _place_linear(restrict_above(sub, above), [None if x is None else collapse[x] for x in order], colour, fresh)
        return _wrap(sub, rho, above, inner, fresh, main)
    aux = fresh()
    node = fresh_branch(rho, colour, sub.nodes)
    split = ExtensionKind.dyadic(aux, p, q)
    return Placement([split, ExtensionKind.ternary(main, aux, node, labelled())], 1, main, rho)


def _place_star(base: TreeOfBSets, kind: ExtensionKind, target: TreeOfBSets, fresh: _FreshIds) -> Placement:
    s = base.root
    colour = kind.node.colour
    leaf_of = dict(kind.labels)
    chain = chain_between(target, target.root, s)
    existing = next((x for x in chain if x.colour == colour), None)

    if existing is not None:
        hub = f_general(target, existing, s)
        comp = g_composite(target, existing, s)
        star_map = {kind.vertex: hub}
        for old, leaf in leaf_of.items():
            star_map[leaf] = min(v for v in target.bsets[existing].neighbours(hub) if comp.get(v) == old)
        main = hub
        for lower, upper in reversed(list(itertools.pairwise(chain[: chain.index(existing) + 1]))):
            collapse = target.g[(lower, upper)]
            toward = target.f[lower][upper]
            main = min(v for v in target.bsets[lower].neighbours(toward) if collapse.get(v) == main)
        return Placement([], None, main, existing, star_map)

    below = [x for x in chain if x.colour < colour]
    upper = chain[len(below)]
    node = ancestor_at(s, colour)
    hub = fresh()
    upper_vertices = target.bsets[upper].sorted_vertices()
    star = ExtensionKind.star(node, hub, {v: v for v in upper_vertices})
    comp = g_composite(target, upper, s)
    star_map = {kind.vertex: hub}
    for old, leaf in leaf_of.items():
        star_map[leaf] = min(v for v in upper_vertices if comp.get(v) == old)
    placement = Placement([star], 0, hub, node, star_map)
    for lower, higher in reversed(list(itertools.pairwise([*below, upper]))):
        placement = _wrap(target, lower, higher, placement, fresh, None)
    placement.anchor, placement.anchor_map = node, star_map
    return placement


def apply_all(d: TreeOfBSets, kinds: Iterable[ExtensionKind]) -> TreeOfBSets:
    """Apply recipes in order."""
    for k in kinds:
        d = extend(d, k)
    return d


def _verify(result: AmalgamResult, a: TreeOfBSets, e1: TreeOfBSets, e2: TreeOfBSets) -> AmalgamResult:
    report = validate(result.amalgam)
    if not report.ok:
        msg = f"amalgam does not validate: {report.problems[0]}"
        raise AmalgamError(msg)
    for name, m, source in (("emb1", result.emb1, e1), ("emb2", result.emb2, e2), ("over", result.over, a)):
        found = check(m, source, result.amalgam)
        if not found.ok:
            msg = f"{name} fails its check: {found.problems[0]}"
            raise AmalgamError(msg)
    if not result.commutes(a, e1, e2):
        msg = "amalgamation square does not commute"
        raise AmalgamError(msg)
    return result


def _case(k1: ExtensionKind, k2: ExtensionKind) -> AmalgamCase:
    star = ExtensionTag.STAR
    if k1.tag is star and k2.tag is star:
        return AmalgamCase.STAR_STAR
    if star in (k1.tag, k2.tag):
        return AmalgamCase.STAR_ROOT
    if k1.tag is not k2.tag or k1.neighbours != k2.neighbours:
        return AmalgamCase.DISJOINT
    if k1.tag in (ExtensionTag.LEAF, ExtensionTag.DYADIC):
        msg = "equal leaf or dyadic attachments are isomorphic over the base"
        raise AmalgamError(msg)
    if k1.tag is ExtensionTag.TERNARY:
        if k1.node.colour == k2.node.colour:
            return AmalgamCase.TERNARY_SAME_COLOUR
        return AmalgamCase.TERNARY_AUXILIARY
    stars = [k.above.tag is star for k in (k1, k2)]
    if all(stars):
        return AmalgamCase.RAMIFICATION_STARS
    if any(stars):
        return AmalgamCase.RAMIFICATION_MIXED
    return AmalgamCase.RAMIFICATION_SHARED


def _push_second(k1: ExtensionKind, k2: ExtensionKind) -> bool:
    """True when the second extension should be pushed into the first."""
    x1, x2 = k1, k2
    while x1.tag is x2.tag is ExtensionTag.RAMIFICATION and x1.neighbours == x2.neighbours:
        x1, x2 = x1.above, x2.above
    if x1.tag is x2.tag is ExtensionTag.STAR:
        return x2.node.colour < x1.node.colour
    if x2.tag is ExtensionTag.STAR:
        return True
    if x1.tag is x2.tag is ExtensionTag.TERNARY and x1.neighbours == x2.neighbours:
        return x2.node.colour < x1.node.colour
    return False


def _identify(
    a: TreeOfBSets,
    e1: TreeOfBSets,
    e2: TreeOfBSets,
    k1: ExtensionKind,
    k2: ExtensionKind,
) -> ArborealMorphism | None:
    """An isomorphism e2 -> e1 fixing a, if there is one."""
    if k1.tag is not k2.tag:
        return None
    if k1.tag is ExtensionTag.STAR:
        if k1.node != k2.node:
            return None
        leaves1 = dict(k1.labels)
        root_map = {leaf: leaves1[old] for old, leaf in k2.labels}
        root_map[k2.vertex] = k1.vertex
    else:
        root_map = {v: v for v in a.domain}
        root_map[k2.vertex] = k1.vertex
    try:
        iso = lift_embedding(e2, e1, e1.root, root_map, MorphismKind.ISOMORPHISM)
    except MorphismError:
        return None
    if inclusion(a, e2).then(iso) != inclusion(a, e1):
        return None
    return iso


def amalgamate_one_point(a: TreeOfBSets, e1: TreeOfBSets, e2: TreeOfBSets) -> AmalgamResult:
    """Amalgamate two one-point extensions of a.

    Raises:
        AmalgamError: If either input is not a one-point strong extension of a.
    """
    try:
        k1, k2 = classify_extension(a, e1), classify_extension(a, e2)
    except ExtensionError as e:
        msg = f"inputs are not one-point extensions: {e}"
        raise AmalgamError(msg) from e
    iso = _identify(a, e1, e2, k1, k2)
    if iso is not None:
        logger.info("one-point amalgam: extensions are isomorphic over the base")
        return _verify(AmalgamResult(e1, identity(e1), iso, inclusion(a, e1), AmalgamCase.IDENTIFIED), a, e1, e2)
    case = _case(k1, k2)
    swap = _push_second(k1, k2)
    pushed, pushed_kind, host = (e2, k2, e1) if swap else (e1, k1, e2)
    placement = push(a, pushed_kind, host)
    d = apply_all(host, placement.kinds)
    if pushed_kind.tag is ExtensionTag.STAR:
        root_map = placement.anchor_map
    else:
        root_map = {**{v: v for v in a.domain}, **placement.anchor_map}
    try:
        emb_pushed = lift_embedding(pushed, d, placement.anchor, root_map)
    except MorphismError as e:
        msg = f"pushed extension does not lift into the amalgam: {e}"
        raise AmalgamError(msg) from e
    emb_host = inclusion(host, d)
    emb1, emb2 = (emb_host, emb_pushed) if swap else (emb_pushed, emb_host)
    logger.info("one-point amalgam: case %s, %d recipe(s)", case.name, len(placement.kinds))
    return _verify(AmalgamResult(d, emb1, emb2, inclusion(a, d), case), a, e1, e2)


# Decomposition into one-point steps


def _fits(a: TreeOfBSets, kind: ExtensionKind, e: TreeOfBSets) -> bool:
    try:
        grown = extend(a, kind)
    except ExtensionError:
        return False
    return is_strong_substructure(grown, e)


def _star_step(a: TreeOfBSets, e: TreeOfBSets) -> ExtensionKind:
    r, low = a.root, e.root
    hub = f_general(e, low, r)
    comp = g_composite(e, low, r)
    around = e.bsets[low].neighbours(hub)
    labels = {old: min(x for x in around if comp.get(x) == old) for old in a.domain}
    return ExtensionKind.star(low, hub, labels)


def _next_step(a: TreeOfBSets, e: TreeOfBSets) -> ExtensionKind:
    """A one-point extension of a that stays strong in e."""
    r = a.root
    if e.root != r:
        if len(a.root_bset) >= 3:  # noqa: PLR2004
            return _star_step(a, e)
        return _root_step(a, restrict_above(e, r))
    return _root_step(a, e)


def _root_candidates(small: BSet, big: BSet) -> list[tuple[str, list[str]]]:
    """Outside vertices paired with their neighbours in big restricted to small plus that vertex."""
    found = []
    for x in sorted(big.vertices - small.vertices):
        try:
            seen = restrict(big, small.vertices | {x})
        except BSetError:
            continue
        found.append((x, sorted(seen.neighbours(x))))
    return found


def _root_step(a: TreeOfBSets, e: TreeOfBSets) -> ExtensionKind:
    r = a.root
    small, big = a.root_bset, e.root_bset
    simple: list[ExtensionKind] = []
    ternaries: list[ExtensionKind] = []
    ramified: list[tuple[str, str]] = []
    for x, ys in _root_candidates(small, big):
        if len(ys) == 2:  # noqa: PLR2004
            simple.append(ExtensionKind.dyadic(x, *ys))
            continue
        if len(ys) != 1:
            continue
        u = ys[0]
        degree = small.degree(u)
        if degree <= 1:
            simple.insert(0, ExtensionKind.leaf(x, u))
        elif degree == 2:  # noqa: PLR2004
            node = child_at(e, r, u)
            if node is not None:
                try:
                    labels = ternary_labels(e, r, node, [*small.neighbours(u), x])
                except ExtensionError:
                    continue
                ternaries.append(ExtensionKind.ternary(x, u, node, labels))
        else:
            ramified.append((x, u))
    for kind in [*sorted(simple, key=lambda k: (k.tag.value, k.vertex)), *ternaries]:
        if _fits(a, kind, e):
            return kind
    for u in sorted({u for _, u in ramified}):
        t_a, t_e = child_at(a, r, u), child_at(e, r, u)
        sub_a, sub_e = restrict_above(a, t_a), restrict_above(e, t_e)
        if sub_a == sub_e:
            continue
        inner = _next_step(sub_a, sub_e)
        collapse = e.g[(r, t_e)]
        for x, w in ramified:
            if w == u and collapse.get(x) == inner.vertex:
                kind = ExtensionKind.ramification(x, u, inner)
                if _fits(a, kind, e):
                    return kind
    msg = "no one-point step stays strong in the extension"
    raise AmalgamError(msg)


def decompose_steps(a: TreeOfBSets, e: TreeOfBSets) -> list[ExtensionKind]:
    """Recipes taking a to e one vertex at a time, using e's own nodes and ids.

    Raises:
        AmalgamError: If a is not a strong substructure of e.
    """
    if not is_strong_substructure(a, e):
        msg = "not a strong substructure"
        raise AmalgamError(msg)
    steps = []
    current = a
    guard = len(e.domain) + len(e.nodes)
    while current != e:
        if len(steps) > guard:
            msg = "decomposition did not converge"
            raise AmalgamError(msg)
        kind = _next_step(current, e)
        current = extend(current, kind)
        steps.append(kind)
    logger.info("decomposed into %d one-point step(s)", len(steps))
    return steps


def decompose(a: TreeOfBSets, e: TreeOfBSets) -> list[TreeOfBSets]:
    """The chain a = A0 < ... < An = e of one-point strong extensions."""
    chain = [a]
    for kind in decompose_steps(a, e):
        chain.append(extend(chain[-1], kind))
    return chain


# General amalgamation


def _transport(
    kind: ExtensionKind,
    mu: ArborealMorphism,
    base: TreeOfBSets,
    level: AmbientNode,
    taken: set[str],
) -> ExtensionKind:
    """Rewrite a recipe over base in the coordinates of mu's target."""
    phi = mu.phi[level]
    if kind.tag is ExtensionTag.STAR:
        node = ancestor_at(mu.tau[level], kind.node.colour)
        return ExtensionKind.star(node, kind.vertex, {phi[old]: leaf for old, leaf in kind.labels})
    new = kind.vertex if kind.vertex not in taken else fresh_id(taken)
    u = phi[kind.neighbours[0]]
    if kind.tag is ExtensionTag.LEAF:
        return ExtensionKind.leaf(new, u)
    if kind.tag is ExtensionTag.DYADIC:
        return ExtensionKind.dyadic(new, u, phi[kind.neighbours[1]])
    if kind.tag is ExtensionTag.TERNARY:
        labels = [(new if rep == kind.vertex else phi[rep], label) for rep, label in kind.labels]
        return ExtensionKind.ternary(new, u, kind.node, labels)
    above = child_at(base, level, kind.neighbours[0])
    return ExtensionKind.ramification(new, u, _transport(kind.above, mu, base, above, taken))


def extend_along(
    mu: ArborealMorphism,
    base: TreeOfBSets,
    kind: ExtensionKind,
    d: TreeOfBSets,
) -> tuple[TreeOfBSets, ArborealMorphism]:
    """Grow d so that mu: base -> d extends to extend(base, kind).

    Returns:
        tuple: The grown tree, which contains d by inclusion, and the extended embedding
    """
    grown_base = extend(base, kind)
    moved = _transport(kind, mu, base, base.root, d.all_ids() | set(mu.phi[base.root].values()))
    placement = push(image(mu, base, d), moved, d)
    grown = apply_all(d, placement.kinds)
    if kind.tag is ExtensionTag.STAR:
        root_map = placement.anchor_map
    else:
        root_map = {**mu.phi[base.root], kind.vertex: placement.anchor_map[moved.vertex]}
    return grown, lift_embedding(grown_base, grown, placement.anchor, root_map)


def amalgamate(a: TreeOfBSets, e1: TreeOfBSets, e2: TreeOfBSets) -> AmalgamResult:
    """Amalgamate two strong extensions of a by folding one-point steps of e1 into e2.

    Raises:
        AmalgamError: If a is not strong in both inputs.
    """
    if not is_strong_substructure(a, e2):
        msg = "base is not a strong substructure of the second extension"
        raise AmalgamError(msg)
    steps = decompose_steps(a, e1)
    if not steps:
        return _verify(AmalgamResult(e2, inclusion(a, e2), identity(e2), inclusion(a, e2), AmalgamCase.TRIVIAL), a, e1, e2)
    if len(steps) == 1 and len(e2.domain) == len(a.domain) + 1:
        return amalgamate_one_point(a, e1, e2)
    d, mu, base = e2, inclusion(a, e2), a
    for kind in steps:
        d, mu = extend_along(mu, base, kind, d)
        base = extend(base, kind)
    logger.info("amalgamated %d step(s); amalgam has %d nodes, %d root vertices", len(steps), *d.size())
    return _verify(AmalgamResult(d, mu, inclusion(e2, d), inclusion(a, d), AmalgamCase.COMPOSITE), a, e1, e2)


# Joint embedding


def pad_root(a: TreeOfBSets, size: int = 3) -> TreeOfBSets:
    """Grow the root B-set by leaf extensions until it has ``size`` vertices."""
    while len(a.root_bset) < size:
        b = a.root_bset
        ends = sorted(leaves(b)) or b.sorted_vertices()
        a = extend(a, ExtensionKind.leaf(fresh_id(b.vertices), ends[0]))
    return a


def joint_embed(
    a1: TreeOfBSets,
    a2: TreeOfBSets,
    *,
    anchor_first: bool = False,
) -> tuple[TreeOfBSets, ArborealMorphism, ArborealMorphism]:
    """Embed two instances strongly into one, above a new root coloured below both.

    With ``anchor_first`` the first instance keeps its nodes and ids, so its embedding is
    an inclusion; otherwise both are moved into fresh cones.

    Raises:
        AmalgamError: If the instances use different colour chains.
    """
    if a1.chain != a2.chain:
        msg = "joint embedding needs a common colour chain"
        raise AmalgamError(msg)
    p1, p2 = pad_root(a1), pad_root(a2)
    c1, c2 = p1.root.colour, p2.root.colour
    low = color_below(a1.chain, [c1, c2])
    if anchor_first:
        root = ancestor_at(p1.root, low)
        base1 = p1.root
        base2 = fresh_branch(root, c2, p1.nodes)
    else:
        root = AmbientNode(low)
        base1, base2 = branch(root, c1, 0), branch(root, c2, 1)
    tau1 = {t: transplant(t, p1.root, base1) for t in p1.nodes}
    tau2 = {t: transplant(t, p2.root, base2) for t in p2.nodes}

    first, second = p1.root_bset.sorted_vertices(), p2.root_bset.sorted_vertices()
    taken: set[str] = set()

    def mint() -> str:
        vertex = fresh_id(taken)
        taken.add(vertex)
        return vertex

    hub1, hub2 = mint(), mint()
    xs = [mint() for _ in first[1:]]
    ys = [mint() for _ in second[1:]]
    double_star = BSet.from_edges(
        [hub1, hub2, *xs, *ys],
        [(hub1, hub2), *((hub1, x) for x in xs), *((hub2, y) for y in ys)],
    )
    collapse1 = {hub2: first[0], **dict(zip(xs, first[1:], strict=True)), **dict.fromkeys(ys, first[0])}
    collapse2 = {hub1: second[0], **dict(zip(ys, second[1:], strict=True)), **dict.fromkeys(xs, second[0])}

    bsets = {root: double_star}
    f = {root: {base1: hub1, base2: hub2}}
    g = {(root, base1): collapse1, (root, base2): collapse2}
    for p, tau in ((p1, tau1), (p2, tau2)):
        bsets.update({tau[t]: p.bsets[t] for t in p.nodes})
        f.update({tau[s]: {tau[t]: v for t, v in kids.items()} for s, kids in p.f.items()})
        g.update({(tau[s], tau[t]): m for (s, t), m in p.g.items()})
    joint = TreeOfBSets(a1.chain, bsets, f, g)
    report = validate(joint)
    if not report.ok:
        msg = f"joint embedding does not validate: {report.problems[0]}"
        raise AmalgamError(msg)

    embeddings = []
    for original, tau in ((a1, tau1), (a2, tau2)):
        m = ArborealMorphism(
            {t: tau[t] for t in original.nodes},
            {t: {v: v for v in original.bsets[t].vertices} for t in original.nodes},
        )
        found = check(m, original, joint)
        if not found.ok:
            msg = f"joint embedding fails its check: {found.problems[0]}"
            raise AmalgamError(msg)
        embeddings.append(m)
    logger.info("joint embedding below colour %s", low)
    return joint, embeddings[0], embeddings[1]


def is_root_drop(a: TreeOfBSets, e: TreeOfBSets) -> bool:
    """True iff e's root lies strictly below a's."""
    return node_lt(e.root, a.root)
