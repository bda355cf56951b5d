"""Command-line entry point for bset-forest."""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path
from typing import TYPE_CHECKING, NoReturn

from bset_forest.core.ambient_tree import AmbientError, ColorChain, format_node
from bset_forest.core.bset_core import BSetError, validate_c_axioms
from bset_forest.data.forest import compute_l, require_valid, witness_node
from bset_forest.data.models import ForestError
from bset_forest.data.serialization import FormatError, dump_lset, dump_tob, load_lset, load_tob, to_dot
from bset_forest.services.amalgam import AmalgamError, amalgamate, decompose_steps, joint_embed
from bset_forest.services.extensions import ExtensionError
from bset_forest.services.fraisse import (
    ChainConfig,
    FraisseError,
    build_chain,
    derive_c_relation,
    has_typical_pair,
    pre_branch_family,
)
from bset_forest.services.generators import InstanceBounds, random_triple
from bset_forest.services.morphisms import MorphismError, symmetric_orbit_union, triple_orbits
from bset_forest.services.reconstruct import ReconstructError, dump_forest, recover_tree
from bset_forest.utils.paths import ensure_output_dir

if TYPE_CHECKING:
    from bset_forest.data.models import TreeOfBSets

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2

DOMAIN_ERRORS = (AmbientError, BSetError, MorphismError, ExtensionError, AmalgamError, FraisseError)
# Errors a fuzz case may raise; each is counted against its triple
FUZZ_ERRORS = (*DOMAIN_ERRORS, ForestError)


class UsageError(Exception):
    """Raised by the argument parser instead of exiting."""


class CliParser(argparse.ArgumentParser):
    """Argument parser reporting usage errors in the ``ERR usage:`` format."""

    def error(self, message: str) -> NoReturn:
        """Raise instead of printing argparse's default usage text."""
        raise UsageError(message)


def build_parser() -> CliParser:
    """Create the argument parser with every subcommand."""
    parser = CliParser(prog="bset-forest", description="Finite coloured trees of B-sets.")
    parser.add_argument("--json", action="store_true", help="structured JSON output")
    parser.add_argument("-o", "--output", help="write the result to a file instead of stdout")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    sub.add_parser("validate", help="validate a TOB file").add_argument("tob")
    sub.add_parser("compile-l", help="compile the L-relation").add_argument("tob")
    witness = sub.add_parser("witness", help="witness node of L(a;b,c)")
    witness.add_argument("tob")
    witness.add_argument("triple", nargs=3)
    amalgam = sub.add_parser("amalgamate", help="amalgamate two strong extensions of a base")
    amalgam.add_argument("base")
    amalgam.add_argument("first")
    amalgam.add_argument("second")
    split = sub.add_parser("decompose", help="one-point steps from a base to an extension")
    split.add_argument("base")
    split.add_argument("extension")
    joint = sub.add_parser("joint-embed", help="embed two instances in one")
    joint.add_argument("first")
    joint.add_argument("second")
    chain = sub.add_parser("chain", help="run the chain construction")
    chain.add_argument("--preset", default="rationals")
    chain.add_argument("--steps", type=int, default=10)
    chain.add_argument("--seed", type=int, default=0)
    chain.add_argument("--window", type=int, default=2)
    chain.add_argument("--emit-all", nargs="?", const="", default=None, metavar="DIR")
    sub.add_parser("reconstruct", help="rebuild a forest from an LSET file").add_argument("lset")
    derive = sub.add_parser("derive-c", help="C-relation from pre-branches omitting an element")
    derive.add_argument("tob")
    derive.add_argument("element")
    sub.add_parser("orbits", help="triple orbits under automorphisms").add_argument("tob")
    fuzz = sub.add_parser("fuzz", help="amalgamate seeded random triples")
    fuzz.add_argument("--preset", default="rationals")
    fuzz.add_argument("--seed", type=int, default=0)
    fuzz.add_argument("--cases", type=int, default=20)
    sub.add_parser("export-dot", help="DOT rendering of a TOB file").add_argument("tob")
    return parser


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _tob(path: str) -> TreeOfBSets:
    return load_tob(_read(path))


def _triple_text(triple: tuple[str, ...]) -> str:
    return " ".join(triple)


def _cmd_validate(args: argparse.Namespace) -> tuple[str, dict]:
    a = require_valid(_tob(args.tob))
    nodes, root = a.size()
    return "ok\n", {"ok": True, "nodes": nodes, "root_vertices": root}


def _cmd_compile_l(args: argparse.Namespace) -> tuple[str, dict]:
    m = compute_l(_tob(args.tob))
    return dump_lset(m), {"domain": sorted(m.domain), "triples": [list(t) for t in m.sorted_triples()]}


def _cmd_witness(args: argparse.Namespace) -> tuple[str, dict]:
    a = _tob(args.tob)
    t = witness_node(a, *args.triple)
    text = format_node(t, a.chain)
    return text + "\n", {"triple": args.triple, "node": text}


def _cmd_amalgamate(args: argparse.Namespace) -> tuple[str, dict]:
    result = amalgamate(_tob(args.base), _tob(args.first), _tob(args.second))
    text = dump_tob(result.amalgam)
    return text, {"case": result.case.name, "amalgam": text}


def _cmd_decompose(args: argparse.Namespace) -> tuple[str, dict]:
    steps = [kind.describe() for kind in decompose_steps(_tob(args.base), _tob(args.extension))]
    text = "".join(f"step {i} {step}\n" for i, step in enumerate(steps, start=1))
    return text, {"steps": steps}


def _cmd_joint_embed(args: argparse.Namespace) -> tuple[str, dict]:
    joint, _, _ = joint_embed(_tob(args.first), _tob(args.second))
    text = dump_tob(joint)
    return text, {"joint": text}


def _cmd_chain(args: argparse.Namespace) -> tuple[str, dict]:
    cfg = ChainConfig(ColorChain.from_name(args.preset), args.steps, args.seed, window=args.window)
    result = build_chain(cfg)
    if args.emit_all is not None:
        out = ensure_output_dir(args.emit_all or None)
        for i, member in enumerate(result.members):
            (out / f"member_{i:03d}.tob").write_text(dump_tob(member), encoding="utf-8")
        logger.info("wrote %d members to %s", len(result.members), out)
    return "\n".join(result.log) + "\n", {"log": result.log, "final": dump_tob(result.members[-1])}


def _cmd_reconstruct(args: argparse.Namespace) -> tuple[str, dict]:
    forest = recover_tree(load_lset(_read(args.lset)))
    text = dump_forest(forest)
    return text, {"nodes": len(forest.bsets), "forest": text}


def _cmd_derive_c(args: argparse.Namespace) -> tuple[str, dict]:
    a = _tob(args.tob)
    relation = derive_c_relation(a, args.element)
    report = validate_c_axioms(relation)
    typical = has_typical_pair(pre_branch_family(a, args.element))
    lines = [f"C {_triple_text(t)}" for t in relation.sorted_triples()]
    lines += [f"{name} {'pass' if result.passed else 'fail'}" for name, result in sorted(report.results.items())]
    lines.append(f"typical_pairs {'yes' if typical else 'no'}")
    data = {
        "triples": [list(t) for t in relation.sorted_triples()],
        "axioms": {name: result.passed for name, result in report.results.items()},
        "typical_pairs": typical,
    }
    return "\n".join(lines) + "\n", data


def _cmd_orbits(args: argparse.Namespace) -> tuple[str, dict]:
    a = _tob(args.tob)
    m = compute_l(a)
    lines, data = [], []
    for i, orbit in enumerate(triple_orbits(a)):
        inside = sum(1 for t in orbit if t in m)
        status = "inside" if inside == len(orbit) else "outside" if inside == 0 else "mixed"
        members = sorted(orbit)
        lines.append(f"orbit {i} size={len(orbit)} l={status}: " + "; ".join(_triple_text(t) for t in members))
        data.append({"triples": [list(t) for t in members], "l": status})
    union = sorted(symmetric_orbit_union(a))
    lines.append("symmetric_union " + "; ".join(_triple_text(t) for t in union))
    return "\n".join(lines) + "\n", {"orbits": data, "symmetric_union": [list(t) for t in union]}


def _cmd_fuzz(args: argparse.Namespace) -> tuple[str, dict]:
    rng = random.Random(args.seed)
    chain = ColorChain.from_name(args.preset)
    bounds = InstanceBounds()
    passed = 0
    failures = []
    for case in range(args.cases):
        a, e1, e2 = random_triple(rng, chain, bounds)
        try:
            amalgamate(a, e1, e2)
        except FUZZ_ERRORS as e:
            logger.warning("fuzz case %d failed: %s", case, e)
            failures.append(f"case {case}: {type(e).__name__}: {e}")
            continue
        passed += 1
    text = f"cases={args.cases} passed={passed}\n" + "".join(f"{line}\n" for line in failures)
    return text, {"cases": args.cases, "passed": passed, "failures": failures}


def _cmd_export_dot(args: argparse.Namespace) -> tuple[str, dict]:
    text = to_dot(_tob(args.tob))
    return text, {"dot": text}


COMMANDS = {
    "validate": _cmd_validate,
    "compile-l": _cmd_compile_l,
    "witness": _cmd_witness,
    "amalgamate": _cmd_amalgamate,
    "decompose": _cmd_decompose,
    "joint-embed": _cmd_joint_embed,
    "chain": _cmd_chain,
    "reconstruct": _cmd_reconstruct,
    "derive-c": _cmd_derive_c,
    "orbits": _cmd_orbits,
    "fuzz": _cmd_fuzz,
    "export-dot": _cmd_export_dot,
}


def _fail(code: str, message: str) -> None:
    first_line = str(message).splitlines()[0] if str(message) else code
    sys.stderr.write(f"ERR {code}: {first_line}\n")


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity == 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s", force=True)


def run(argv: list[str] | None = None) -> int:
    """Run one invocation and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        _fail("usage", str(e))
        return EXIT_USAGE
    _configure_logging(args.verbose)
    try:
        text, data = COMMANDS[args.command](args)
    except FormatError as e:
        _fail("parse", str(e))
        return EXIT_DOMAIN
    except ForestError as e:
        _fail("invalid", str(e))
        return EXIT_DOMAIN
    except ReconstructError as e:
        _fail("reconstruct", str(e))
        return EXIT_DOMAIN
    except OSError as e:
        _fail("io", f"{e.strerror}: {e.filename}")
        return EXIT_DOMAIN
    except DOMAIN_ERRORS as e:
        _fail("domain", str(e))
        return EXIT_DOMAIN
    except Exception as e:
        logger.exception("Unexpected failure in %s", args.command)
        _fail("internal", str(e))
        return EXIT_DOMAIN
    output = json.dumps(data, indent=2, sort_keys=True) + "\n" if args.json else text
    if args.output:
        Path(args.output).write_text(output, encoding="utf-8")
    else:
        sys.stdout.write(output)
    return EXIT_OK


def main() -> int:
    """Start the bset-forest command line."""
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
