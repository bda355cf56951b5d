"""Bounded enumeration of one-point extensions and seeded random instances."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

from bset_forest.core.ambient_tree import AmbientNode, ancestor_at, default_window, fresh_branch
from bset_forest.core.bset_core import BSet
from bset_forest.data.forest import child_at, restrict_above
from bset_forest.data.models import TreeOfBSets
from bset_forest.services.extensions import ExtensionError, ExtensionKind, extend

if TYPE_CHECKING:
    import random
    from collections.abc import Iterable

    from bset_forest.core.ambient_tree import ColorChain, Colour

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_SIZE = 4
RANDOM_TRIES = 64


@dataclass(frozen=True)
class InstanceBounds:
    """Size limits for generated instances; an empty colour tuple means the chain's default window."""

    max_nodes: int = 4
    max_root: int = 9
    colours: tuple[Colour, ...] = ()

    def window(self, chain: ColorChain) -> tuple[Colour, ...]:
        """The colours to draw from."""
        return self.colours or default_window(chain, DEFAULT_WINDOW_SIZE)

    def admits(self, a: TreeOfBSets) -> bool:
        """True iff a is within the bounds."""
        nodes, root = a.size()
        return nodes <= self.max_nodes and root <= self.max_root


def next_id(taken: Iterable[str]) -> str:
    """The first ``v<k>`` id not in taken."""
    taken = set(taken)
    k = 0
    while f"v{k}" in taken:
        k += 1
    return f"v{k}"


def seed_instance(chain: ColorChain, colour: Colour) -> TreeOfBSets:
    """A single node of the given colour carrying one vertex."""
    return TreeOfBSets.single(chain, AmbientNode(chain.validate_colour(colour)), BSet.path("v0"))


def one_point_kinds(a: TreeOfBSets, colours: Iterable[Colour], *, stars: bool = True) -> list[ExtensionKind]:
    """Every one-point extension recipe over a whose new colours come from ``colours``.

    Args:
        a: The instance to extend
        colours: Colours available for new nodes
        stars: Whether to include star extensions below the root

    Returns:
        list[ExtensionKind]: Recipes in a deterministic order; each applies to a
    """
    colours = sorted(set(colours))
    r = a.root
    b = a.root_bset
    new = next_id(b.vertices)
    kinds: list[ExtensionKind] = []
    if stars and len(b) >= 3:  # noqa: PLR2004
        kinds.extend(
            ExtensionKind.star(ancestor_at(r, c), new, {v: v for v in b.vertices}) for c in colours if c < r.colour
        )
    for u in b.sorted_vertices():
        degree = b.degree(u)
        if degree <= 1:
            kinds.append(ExtensionKind.leaf(new, u))
        elif degree == 2:  # noqa: PLR2004
            p, q = b.neighbours(u)
            for c in colours:
                if c <= r.colour:
                    continue
                node = fresh_branch(r, c, a.nodes)
                for pattern in ([p, new, q], [new, p, q], [p, q, new]):
                    kinds.append(ExtensionKind.ternary(new, u, node, [(x, x) for x in pattern]))
        else:
            t = child_at(a, r, u)
            kinds.extend(
                ExtensionKind.ramification(new, u, inner)
                for inner in one_point_kinds(restrict_above(a, t), [c for c in colours if c > r.colour])
            )
    kinds.extend(ExtensionKind.dyadic(new, p, q) for p, q in b.sorted_edges())
    return kinds


def one_point_extensions(
    a: TreeOfBSets,
    colours: Iterable[Colour],
    bounds: InstanceBounds | None = None,
    *,
    stars: bool = True,
) -> list[TreeOfBSets]:
    """Apply every recipe from ``one_point_kinds``, keeping results within bounds."""
    found = []
    for kind in one_point_kinds(a, colours, stars=stars):
        try:
            e = extend(a, kind)
        except ExtensionError as err:
            logger.debug("skipping %s: %s", kind.describe(), err)
            continue
        if bounds is None or bounds.admits(e):
            found.append(e)
    return found


def random_extension(
    rng: random.Random,
    a: TreeOfBSets,
    steps: int,
    bounds: InstanceBounds | None = None,
) -> TreeOfBSets:
    """Grow a by up to ``steps`` random one-point extensions, staying within bounds."""
    bounds = bounds or InstanceBounds()
    colours = bounds.window(a.chain)
    current = a
    for _ in range(steps):
        options = one_point_extensions(current, colours, bounds)
        if not options:
            break
        current = rng.choice(options)
    return current


def random_instance(
    rng: random.Random,
    chain: ColorChain,
    bounds: InstanceBounds | None = None,
    steps: int | None = None,
) -> TreeOfBSets:
    """A random valid instance grown from a single vertex."""
    bounds = bounds or InstanceBounds()
    colours = bounds.window(chain)
    start = seed_instance(chain, rng.choice(colours))
    if steps is None:
        steps = rng.randint(0, bounds.max_root - 1)
    return random_extension(rng, start, steps, bounds)


def random_triple(
    rng: random.Random,
    chain: ColorChain,
    bounds: InstanceBounds | None = None,
) -> tuple[TreeOfBSets, TreeOfBSets, TreeOfBSets]:
    """A base with two strong extensions of it, for amalgamation."""
    bounds = bounds or InstanceBounds()
    for _ in range(RANDOM_TRIES):
        a = random_instance(rng, chain, bounds, steps=rng.randint(0, max(bounds.max_root // 2 - 1, 0)))
        room = bounds.max_root - len(a.domain)
        e1 = random_extension(rng, a, rng.randint(0, room), bounds)
        e2 = random_extension(rng, a, rng.randint(0, room), bounds)
        if e1 != a or e2 != a:
            return a, e1, e2
    return a, e1, e2
