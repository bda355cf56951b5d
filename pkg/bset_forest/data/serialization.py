"""Canonical text formats: TOB for trees of B-sets, LSET for L-relations, DOT for viewing."""

from __future__ import annotations

import logging
import re
from typing import TYPE_CHECKING

from bset_forest.core.ambient_tree import AmbientError, ColorChain, format_node, parse_node
from bset_forest.core.bset_core import BSet, BSetError
from bset_forest.data.forest import validate
from bset_forest.data.models import ForestError, LSet, TreeOfBSets

if TYPE_CHECKING:
    from bset_forest.core.ambient_tree import AmbientNode

logger = logging.getLogger(__name__)

TOB_HEADER = "TOB v1"
LSET_HEADER = "LSET v1"

_ID_RE = re.compile(r"^[^\s\-:,<>|()]+$")


class FormatError(ValueError):
    """Raised when text does not follow a serialization format."""


def check_id(vertex: str) -> str:
    """Return the id if it is serializable."""
    if not _ID_RE.match(vertex):
        msg = f"vertex id {vertex!r} contains reserved characters"
        raise FormatError(msg)
    return vertex


def dump_tob(a: TreeOfBSets) -> str:
    """Serialize a tree of B-sets; nodes in sorted order, maps sorted by id."""
    chain = a.chain
    lines = [f"{TOB_HEADER} chain={chain.name}"]
    for t in a.nodes:
        b = a.bsets[t]
        lines.append(f"node {format_node(t, chain)}")
        lines.append("vertices " + " ".join(check_id(v) for v in b.sorted_vertices()))
        lines.append(("edges " + " ".join(f"{p}-{q}" for p, q in b.sorted_edges())).rstrip())
        for child in a.children(t):
            child_text = format_node(child, chain)
            lines.append(f"f {child_text} -> {a.f[t][child]}")
            gmap = a.g[(t, child)]
            lines.append(f"g {child_text}: " + " ".join(f"{v}->{gmap[v]}" for v in sorted(gmap)))
    return "\n".join(lines) + "\n"


def load_tob(text: str) -> TreeOfBSets:
    """Parse and validate a TOB document.

    Raises:
        FormatError: If the text is malformed.
        ForestError: If the parsed instance fails validation.
    """
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or not lines[0].startswith(TOB_HEADER + " chain="):
        msg = "missing 'TOB v1 chain=<preset>' header"
        raise FormatError(msg)
    try:
        chain = ColorChain.from_name(lines[0].split("chain=", 1)[1].strip())
        a = _parse_blocks(lines[1:], chain)
    except (AmbientError, BSetError) as e:
        raise FormatError(str(e)) from e
    report = validate(a)
    if not report.ok:
        raise ForestError(report.problems[0])
    return a


def _parse_blocks(lines: list[str], chain: ColorChain) -> TreeOfBSets:
    bsets: dict[AmbientNode, BSet] = {}
    f: dict[AmbientNode, dict[AmbientNode, str]] = {}
    g: dict[tuple[AmbientNode, AmbientNode], dict[str, str]] = {}
    current: AmbientNode | None = None
    vertices: list[str] = []
    i = 0
    while i < len(lines):
        keyword, _, rest = lines[i].partition(" ")
        if keyword == "node":
            current = parse_node(rest, chain)
            if current in bsets:
                msg = f"node {rest} declared twice"
                raise FormatError(msg)
            if i + 2 >= len(lines) or not lines[i + 1].startswith("vertices") or not lines[i + 2].startswith("edges"):
                msg = f"node {rest} must be followed by 'vertices' and 'edges' lines"
                raise FormatError(msg)
            vertices = [check_id(v) for v in lines[i + 1].split()[1:]]
            edges = []
            for pair in lines[i + 2].split()[1:]:
                p, sep, q = pair.partition("-")
                if not sep:
                    msg = f"bad edge {pair!r}"
                    raise FormatError(msg)
                edges.append((p, q))
            bsets[current] = BSet.from_edges(vertices, edges)
            i += 3
            continue
        if current is None:
            msg = f"'{keyword}' line before any node"
            raise FormatError(msg)
        if keyword == "f":
            child_text, sep, vertex = rest.rpartition(" -> ")
            if not sep:
                msg = f"bad f line {lines[i]!r}"
                raise FormatError(msg)
            f.setdefault(current, {})[parse_node(child_text, chain)] = vertex.strip()
        elif keyword == "g":
            child_text, sep, pairs = rest.partition(": ")
            if not sep:
                child_text, pairs = rest.rstrip(":"), ""
            mapping = {}
            for pair in pairs.split():
                v, arrow, w = pair.partition("->")
                if not arrow:
                    msg = f"bad g pair {pair!r}"
                    raise FormatError(msg)
                mapping[v] = w
            g[(current, parse_node(child_text, chain))] = mapping
        else:
            msg = f"unknown line {lines[i]!r}"
            raise FormatError(msg)
        i += 1
    if not bsets:
        msg = "no nodes"
        raise FormatError(msg)
    try:
        return TreeOfBSets(chain, bsets, f, g)
    except ForestError as e:
        raise FormatError(str(e)) from e


def dump_lset(m: LSet) -> str:
    """Serialize an L-set with triples in lexicographic order."""
    lines = [LSET_HEADER, ("domain " + " ".join(sorted(m.domain))).rstrip()]
    lines += [f"L {x} {y} {z}" for x, y, z in m.sorted_triples()]
    return "\n".join(lines) + "\n"


def load_lset(text: str) -> LSet:
    """Parse an LSET document; the result satisfies the L-set invariants."""
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if len(lines) < 2 or lines[0] != LSET_HEADER or not lines[1].startswith("domain"):  # noqa: PLR2004
        msg = "expected 'LSET v1' then a 'domain' line"
        raise FormatError(msg)
    domain = [check_id(v) for v in lines[1].split()[1:]]
    triples = []
    for line in lines[2:]:
        parts = line.split()
        if len(parts) != 4 or parts[0] != "L":  # noqa: PLR2004
            msg = f"bad L line {line!r}"
            raise FormatError(msg)
        triples.append((parts[1], parts[2], parts[3]))
    return LSet.build(domain, triples)


def to_dot(a: TreeOfBSets) -> str:
    """DOT text: the node poset as one digraph with each B-set as a named subgraph."""
    chain = a.chain
    index = {t: i for i, t in enumerate(a.nodes)}
    lines = ["digraph tree_of_bsets {", "  compound=true;"]
    for t in a.nodes:
        i = index[t]
        label = format_node(t, chain).replace('"', "'")
        lines.append(f'  n{i} [shape=box, label="{label}"];')
    for t in a.nodes:
        for child in a.children(t):
            lines.append(f'  n{index[t]} -> n{index[child]} [label="{a.f[t][child]}"];')
    for t in a.nodes:
        i = index[t]
        b = a.bsets[t]
        lines.append(f"  subgraph cluster_n{i} {{")
        lines.append(f'    label="B({format_node(t, chain)})";')
        lines.extend(f'    "n{i}:{v}" [label="{v}"];' for v in b.sorted_vertices())
        lines.extend(f'    "n{i}:{p}" -> "n{i}:{q}" [dir=none];' for p, q in b.sorted_edges())
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"
