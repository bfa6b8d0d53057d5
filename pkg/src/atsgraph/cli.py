"""Command-line entry point: ``atsgraph <command> [options]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import harness
from .centrality import KINDS


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", help="comma-separated seed list, e.g. 0,1,2")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
    common.add_argument("--trace", action="store_true", help="dump per-step score tables")
    common.add_argument("--jobs", type=int, help="parallel seed workers")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="atsgraph", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in harness.COMMANDS:
        sub.add_parser(name, parents=[common])
    c = sub.add_parser("centrality", parents=[common])
    c.add_argument("--kind", choices=KINDS, default="pagerank")
    c.add_argument("--graph", required=True, help="edge-list file")
    return parser


def _error(kind: str, message: str, field=None) -> int:
    print("error: " + json.dumps({"error": kind, "message": message, "field": field}),
          file=sys.stderr)
    return 2


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "centrality":
            if not args.out:
                return _error("ConfigError", "--out is required", "out")
            harness.cmd_centrality(args.graph, args.kind, args.out)
            return 0
        overrides = list(args.set)
        if args.out:
            overrides.append(f"out={args.out}")
        if args.seed:
            overrides.append(f"seeds={args.seed}")
        if args.trace:
            overrides.append("trace=true")
        if args.jobs:
            overrides.append(f"jobs={args.jobs}")
        cfg = harness.load_config(args.config, overrides)
        result = harness.COMMANDS[args.command](cfg)
    except harness.ConfigError as exc:
        return _error("ConfigError", str(exc), exc.field)
    except (OSError, ValueError, RuntimeError) as exc:
        return _error(type(exc).__name__, str(exc))
    if args.verbose:
        print(json.dumps(result, indent=2, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
