"""Command line harness.

Every subcommand runs one experiment, writes <out>/<name>.csv and .json, and
exits 0 only when all rows pass their bounds.  Seeds come from --seed, the
PDTLAB_SEED environment variable, or the default, in that order.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import suite

DEFAULT_SEED = 20240801


def _load_json_arg(value: str) -> dict:
    """Inline JSON, or @path to a JSON file."""
    if value.startswith("@"):
        with open(value[1:]) as fh:
            return json.load(fh)
    return json.loads(value)


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=None, help="experiment seed")
    sub.add_argument("--config", type=str, default=None, help="JSON config file")
    sub.add_argument("--out", type=str, default="reports", help="output directory")
    mode = sub.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact")
    mode.add_argument("--monte-carlo", dest="mode", action="store_const", const="monte-carlo")
    sub.add_argument("--samples", type=int, default=None, help="Monte Carlo sample count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdtlab",
        description="Parity decision tree laboratory: discrepancy, skew complexity, "
        "extraction and compression checks at desk scale.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    for name in ("xor-lemma", "direct-sum", "compress", "separations", "extract"):
        sub = subs.add_parser(name, help=f"run the {name} experiment")
        _add_common(sub)

    disc = subs.add_parser("disc", help="bias/discrepancy quantities for one instance")
    _add_common(disc)
    disc.add_argument("--function", type=str, required=True, help="function spec JSON or @file")
    disc.add_argument("--dist", type=str, default=None, help="distribution spec JSON or @file")

    comp = subs.add_parser("complexity", help="depth and cost oracles for one instance")
    _add_common(comp)
    comp.add_argument("--function", type=str, required=True)
    comp.add_argument("--dist", type=str, default=None)
    comp.add_argument("--eps", type=float, default=1 / 3)
    comp.add_argument("--dprod", action="store_true", help="also grid-search product distributions")

    skew = subs.add_parser("skew", help="skew cost of a serialized tree")
    _add_common(skew)
    skew.add_argument("--tree", type=str, required=True, help="tree JSON file")
    skew.add_argument("--dist", type=str, required=True)

    rep = subs.add_parser("report", help="re-check the verdicts stored in a report")
    rep.add_argument("path", type=str, help="JSON report to re-ingest")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "report":
        ok, mismatches = suite.reingest(args.path)
        if ok:
            print(f"{args.path}: verdicts reproduce")
            return 0
        print(f"{args.path}: verdict mismatches at rows {mismatches}")
        return 1

    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("PDTLAB_SEED", DEFAULT_SEED))
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
    if args.samples is not None:
        cfg["samples"] = args.samples
    if args.mode is not None:
        cfg["mode"] = args.mode
    if getattr(args, "function", None):
        cfg["function"] = _load_json_arg(args.function)
    if getattr(args, "dist", None):
        cfg["dist"] = _load_json_arg(args.dist)
    if getattr(args, "eps", None) is not None and args.command == "complexity":
        cfg["eps"] = args.eps
    if getattr(args, "dprod", False):
        cfg["dprod"] = True
    if getattr(args, "tree", None):
        cfg["tree"] = args.tree

    rows = suite.EXPERIMENTS[args.command](cfg, seed)
    csv_path, json_path, all_pass = suite.emit_report(rows, args.out, args.command, cfg, seed)
    n_pass = sum(r["passed"] for r in rows)
    print(f"{args.command}: {n_pass}/{len(rows)} rows pass -> {csv_path}, {json_path}")
    return 0 if all_pass else 1


if __name__ == "__main__":
    sys.exit(main())
