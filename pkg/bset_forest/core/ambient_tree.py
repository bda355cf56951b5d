"""Colour chains, the coloured ambient tree and Adeleke's upper semilinear order.

Nodes of the ambient tree are finite branching sequences ``c0 | (c1,n1) ... (ck,nk)`` with
strictly increasing colours. A node climbs its own chain by raising its final colour and
branches off into a new copy of the chain by appending an entry.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from enum import Enum, auto
from fractions import Fraction
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    import random
    from collections.abc import Iterable

logger = logging.getLogger(__name__)

Colour = Fraction | tuple[Fraction, ...]

LEX_LETTERS = frozenset("ZQ")
RESERVED_LETTERS = frozenset({"α", "β"})
DEFAULT_ALPHABET = ("a", "b", "c")

_ENTRY_RE = re.compile(r"\(\s*(<[^>]*>|[^,()<>\s]+)\s*,\s*(\d+)\s*\)")


class AmbientError(ValueError):
    """Raised for malformed nodes, colours or mixed chains."""


class ChainPreset(Enum):
    """Supported colour chains."""

    OMEGA_STAR = auto()
    RATIONALS = auto()
    LEX_PRODUCT = auto()


@dataclass(frozen=True)
class ColorChain:
    """A chain of colours with no least element."""

    preset: ChainPreset
    word: str = ""

    def __post_init__(self) -> None:
        """Check the lexicographic word."""
        if self.preset is ChainPreset.LEX_PRODUCT:
            if not self.word or set(self.word) - LEX_LETTERS:
                msg = f"LexProduct word must be a non-empty word over Z,Q, got {self.word!r}"
                raise AmbientError(msg)
        elif self.word:
            msg = f"{self.preset.name} takes no word"
            raise AmbientError(msg)

    @property
    def name(self) -> str:
        """Name used in file headers and on the command line."""
        if self.preset is ChainPreset.OMEGA_STAR:
            return "omegastar"
        if self.preset is ChainPreset.RATIONALS:
            return "rationals"
        return f"lex:{self.word}"

    @classmethod
    def from_name(cls, name: str) -> ColorChain:
        """Parse a chain name such as ``omegastar``, ``rationals`` or ``lex:ZQ``."""
        if name == "omegastar":
            return cls(ChainPreset.OMEGA_STAR)
        if name == "rationals":
            return cls(ChainPreset.RATIONALS)
        if name.startswith("lex:"):
            return cls(ChainPreset.LEX_PRODUCT, name[4:])
        msg = f"unknown colour chain {name!r}"
        raise AmbientError(msg)

    def validate_colour(self, colour: Colour) -> Colour:
        """Return the colour if it belongs to this chain, else raise AmbientError."""
        if self.preset is ChainPreset.LEX_PRODUCT:
            if not isinstance(colour, tuple) or len(colour) != len(self.word):
                msg = f"colour {colour!r} is not a point of lex:{self.word}"
                raise AmbientError(msg)
            for letter, coordinate in zip(self.word, colour, strict=True):
                if not isinstance(coordinate, Fraction) or (letter == "Z" and coordinate.denominator != 1):
                    msg = f"colour {colour!r} is not a point of lex:{self.word}"
                    raise AmbientError(msg)
            return colour
        if not isinstance(colour, Fraction):
            msg = f"colour {colour!r} is not a rational"
            raise AmbientError(msg)
        if self.preset is ChainPreset.OMEGA_STAR and (colour.denominator != 1 or colour >= 0):
            msg = f"colour {colour} is not a negative integer"
            raise AmbientError(msg)
        return colour

    def parse_colour(self, text: str) -> Colour:
        """Parse the text form of a colour of this chain."""
        text = text.strip()
        try:
            if self.preset is ChainPreset.LEX_PRODUCT:
                if not (text.startswith("<") and text.endswith(">")):
                    msg = f"expected <a,b,...> colour, got {text!r}"
                    raise AmbientError(msg)
                colour: Colour = tuple(Fraction(part.strip()) for part in text[1:-1].split(","))
            else:
                colour = Fraction(text)
        except (ValueError, ZeroDivisionError) as e:
            msg = f"bad colour {text!r}"
            raise AmbientError(msg) from e
        return self.validate_colour(colour)

    def format_colour(self, colour: Colour) -> str:
        """Text form of a colour: ``p/q`` or ``<a,b>`` for lexicographic products."""
        if isinstance(colour, tuple):
            return "<" + ",".join(str(c) for c in colour) + ">"
        return str(colour)

    def colour(self, *parts: int | str | Fraction) -> Colour:
        """Build a colour of this chain from ints, strings or fractions."""
        values = tuple(Fraction(p) for p in parts)
        if self.preset is ChainPreset.LEX_PRODUCT:
            return self.validate_colour(values)
        if len(values) != 1:
            msg = "scalar chains take a single coordinate"
            raise AmbientError(msg)
        return self.validate_colour(values[0])


def color_below(chain: ColorChain, colours: Iterable[Colour]) -> Colour:
    """Return a colour strictly below every given colour.

    The rule is min - 1, applied to the final coordinate for lexicographic products.

    Args:
        chain: The chain the colours live in
        colours: A non-empty collection of colours

    Returns:
        Colour: The constructed colour
    """
    colours = [chain.validate_colour(c) for c in colours]
    if not colours:
        msg = "color_below needs at least one colour"
        raise AmbientError(msg)
    lowest = min(colours)
    if isinstance(lowest, tuple):
        return (*lowest[:-1], lowest[-1] - 1)
    return lowest - 1


def default_window(chain: ColorChain, size: int) -> tuple[Colour, ...]:
    """A finite increasing window of colours used when sampling a dense chain."""
    if chain.preset is ChainPreset.OMEGA_STAR:
        return tuple(Fraction(-size + i) for i in range(size))
    if chain.preset is ChainPreset.RATIONALS:
        return tuple(Fraction(i) for i in range(size))
    zeros = (Fraction(0),) * (len(chain.word) - 1)
    return tuple((*zeros, Fraction(i)) for i in range(size))


@dataclass(frozen=True)
class AmbientNode:
    """A point of the ambient tree as a branching sequence."""

    head: Colour
    tail: tuple[tuple[Colour, int], ...] = field(default=())

    def __post_init__(self) -> None:
        """Check that colours strictly increase and indices are natural."""
        previous = self.head
        for colour, index in self.tail:
            if not _same_shape(previous, colour) or not colour > previous:
                msg = f"colours must strictly increase along a node, got {self!r}"
                raise AmbientError(msg)
            if index < 0:
                msg = f"branch index must be natural, got {index}"
                raise AmbientError(msg)
            previous = colour

    @property
    def colour(self) -> Colour:
        """The node's colour, its final colour entry."""
        return self.tail[-1][0] if self.tail else self.head

    @property
    def depth(self) -> int:
        """Number of branchings taken from the trunk."""
        return len(self.tail)

    def entries(self) -> list[tuple[Colour, int | None]]:
        """The sequence as ``(colour, index)`` entries with the head indexed ``None``."""
        return [(self.head, None), *self.tail]

    def sort_key(self) -> tuple:
        """A deterministic total order used for output and tie-breaking."""
        return (self.head, self.tail)

    def __lt__(self, other: AmbientNode) -> bool:
        """Order nodes by sort key for sorting only; use node_leq for the tree order."""
        return self.sort_key() < other.sort_key()


def _same_shape(a: Colour, b: Colour) -> bool:
    if isinstance(a, tuple) or isinstance(b, tuple):
        return isinstance(a, tuple) and isinstance(b, tuple) and len(a) == len(b)
    return True


def _check_chain(a: AmbientNode, b: AmbientNode) -> None:
    if not _same_shape(a.head, b.head):
        msg = f"nodes {format_node(a)} and {format_node(b)} live in different chains"
        raise AmbientError(msg)


def _from_entries(entries: list[tuple[Colour, int | None]]) -> AmbientNode:
    head = entries[0][0]
    return AmbientNode(head, tuple((c, n) for c, n in entries[1:]))


def node_leq(a: AmbientNode, b: AmbientNode) -> bool:
    """Ambient order: a <= b.

    With a = (c0,(c1,n1)..(ck,nk)) and b = (d0,(d1,m1)..(dl,ml)) this holds iff k <= l,
    ni = mi for 0 < i <= k, ci = di for i < k and ck <= dk.
    """
    _check_chain(a, b)
    k = a.depth
    if k > b.depth:
        return False
    ea, eb = a.entries(), b.entries()
    if any(ea[i][1] != eb[i][1] for i in range(1, k + 1)):
        return False
    if any(ea[i][0] != eb[i][0] for i in range(k)):
        return False
    return ea[k][0] <= eb[k][0]


def node_lt(a: AmbientNode, b: AmbientNode) -> bool:
    """Strict ambient order."""
    return a != b and node_leq(a, b)


def node_meet(a: AmbientNode, b: AmbientNode) -> AmbientNode:
    """Greatest lower bound of two nodes."""
    _check_chain(a, b)
    ea, eb = a.entries(), b.entries()
    if ea[0][0] != eb[0][0]:
        return AmbientNode(min(ea[0][0], eb[0][0]))
    i = 1
    while True:
        if i == len(ea):
            return a
        if i == len(eb):
            return b
        (ca, na), (cb, nb) = ea[i], eb[i]
        if na != nb:
            return _from_entries(ea[:i])
        if ca != cb:
            return _from_entries([*ea[:i], (min(ca, cb), na)])
        i += 1


def raise_node(a: AmbientNode, c: Colour) -> AmbientNode:
    """Move up the node's own chain to colour c."""
    if not c > a.colour:
        msg = f"raise needs a colour above {a.colour}"
        raise AmbientError(msg)
    if not a.tail:
        return AmbientNode(c)
    return AmbientNode(a.head, (*a.tail[:-1], (c, a.tail[-1][1])))


def branch(a: AmbientNode, c: Colour, n: int) -> AmbientNode:
    """Branch off above a into copy n of the chain, arriving at colour c."""
    if not c > a.colour:
        msg = f"branch needs a colour above {a.colour}"
        raise AmbientError(msg)
    return AmbientNode(a.head, (*a.tail, (c, n)))


def ancestor_at(a: AmbientNode, c: Colour) -> AmbientNode:
    """The node of colour c below a on a's chain."""
    if c > a.colour:
        msg = f"colour {c} lies above {a.colour}"
        raise AmbientError(msg)
    entries = a.entries()
    i = next(i for i, (ci, _) in enumerate(entries) if c <= ci)
    if i == 0:
        return AmbientNode(c)
    return _from_entries([*entries[:i], (c, entries[i][1])])


def transplant(node: AmbientNode, old_base: AmbientNode, new_base: AmbientNode) -> AmbientNode:
    """Move a node of the cone above old_base into the cone above new_base.

    Both bases must carry the same colour. Order and meets within the cone are preserved.
    """
    if old_base.colour != new_base.colour:
        msg = "transplant needs bases of equal colour"
        raise AmbientError(msg)
    if not node_leq(old_base, node):
        msg = f"{format_node(node)} is not above {format_node(old_base)}"
        raise AmbientError(msg)
    k = old_base.depth
    entries = node.entries()
    base_entries = new_base.entries()
    moved = [*base_entries[:-1], (entries[k][0], base_entries[-1][1]), *entries[k + 1 :]]
    return _from_entries(moved)


def fresh_branch(base: AmbientNode, c: Colour, nodes: Iterable[AmbientNode]) -> AmbientNode:
    """Branch off base at colour c with the least index unused among nodes."""
    used = -1
    depth = base.depth
    for x in nodes:
        if x.depth > depth and x.head == base.head and x.tail[:depth] == base.tail:
            used = max(used, x.tail[depth][1])
    return branch(base, c, used + 1)


def is_meet_closed(nodes: Iterable[AmbientNode]) -> bool:
    """True iff the node set is closed under meets."""
    nodes = set(nodes)
    if not nodes:
        msg = "is_meet_closed needs a non-empty set"
        raise AmbientError(msg)
    return all(node_meet(a, b) in nodes for a in nodes for b in nodes)


def format_node(node: AmbientNode, chain: ColorChain | None = None) -> str:
    """Text form ``c0 | (c1,n1) (c2,n2)``; a bare head is written alone."""
    fmt = chain.format_colour if chain is not None else _format_any
    text = fmt(node.head)
    if node.tail:
        text += " | " + " ".join(f"({fmt(c)},{n})" for c, n in node.tail)
    return text


def _format_any(colour: Colour) -> str:
    if isinstance(colour, tuple):
        return "<" + ",".join(str(c) for c in colour) + ">"
    return str(colour)


def parse_node(text: str, chain: ColorChain) -> AmbientNode:
    """Parse the text form of a node."""
    head_text, _, tail_text = text.partition("|")
    head = chain.parse_colour(head_text)
    tail = []
    rest = tail_text.strip()
    while rest:
        match = _ENTRY_RE.match(rest)
        if match is None:
            msg = f"bad node entry in {text!r}"
            raise AmbientError(msg)
        tail.append((chain.parse_colour(match.group(1)), int(match.group(2))))
        rest = rest[match.end() :].strip()
    return AmbientNode(head, tuple(tail))


# Adeleke's order


@dataclass(frozen=True)
class AdelekeNode:
    """A sequence q1 w1 q2 ... qk with decreasing rationals and letters between them."""

    values: tuple[Fraction, ...]
    letters: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        """Check alternation, decrease and the reserved letters."""
        if not self.values or len(self.letters) != len(self.values) - 1:
            msg = "an Adeleke node alternates values and letters, starting and ending with a value"
            raise AmbientError(msg)
        if any(b >= a for a, b in zip(self.values, self.values[1:])):
            msg = f"values must strictly decrease, got {self.values}"
            raise AmbientError(msg)
        if RESERVED_LETTERS & set(self.letters):
            msg = "letters α and β are reserved"
            raise AmbientError(msg)

    def __str__(self) -> str:
        """Readable form such as ``3 a 1``."""
        parts = [str(self.values[0])]
        for letter, value in zip(self.letters, self.values[1:]):
            parts += [letter, str(value)]
        return " ".join(parts)


def adeleke_leq(p: AdelekeNode, q: AdelekeNode) -> bool:
    """p <= q: q is a shorter (or equal) sequence and p extends it downward."""
    k, l = len(p.values), len(q.values)
    if l > k:
        return False
    if p.values[: l - 1] != q.values[: l - 1] or p.letters[: l - 1] != q.letters[: l - 1]:
        return False
    return p.values[l - 1] <= q.values[l - 1]


def adeleke_meet_up(p: AdelekeNode, q: AdelekeNode) -> AdelekeNode:
    """Least upper bound of two Adeleke nodes."""
    shortest = min(len(p.values), len(q.values))
    i = 0
    while i < shortest - 1 and p.values[i] == q.values[i] and p.letters[i] == q.letters[i]:
        i += 1
    return AdelekeNode(
        (*p.values[:i], max(p.values[i], q.values[i])),
        p.letters[:i],
    )


def sample_adeleke(
    rng: random.Random,
    size: int,
    alphabet: tuple[str, ...] = DEFAULT_ALPHABET,
    max_length: int = 3,
) -> list[AdelekeNode]:
    """Draw a finite sample of distinct Adeleke nodes with small rational values."""
    if RESERVED_LETTERS & set(alphabet):
        msg = "alphabet must not contain α or β"
        raise AmbientError(msg)
    sample: dict[AdelekeNode, None] = {}
    pool = [Fraction(n, 2) for n in range(-6, 7)]
    while len(sample) < size:
        length = rng.randint(1, max_length)
        values = tuple(sorted(rng.sample(pool, length), reverse=True))
        letters = tuple(rng.choice(alphabet) for _ in range(length - 1))
        sample[AdelekeNode(values, letters)] = None
    return list(sample)
