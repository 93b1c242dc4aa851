"""Command line interface.

    glvortex {simulate,ode,compare,sweep,diagnose} --config run.toml --out DIR

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 vortex identity lost.
"""

from __future__ import annotations

import argparse
import sys

from .config import read_config_data, resolve_config
from .errors import ConfigError, GlvError
from .harness import run_experiment

KINDS = ("simulate", "ode", "compare", "sweep", "diagnose")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glvortex",
        description="Ginzburg-Landau vortex laboratory: simulate the forced "
                    "mixed flow, track defects, and verify the vortex motion law.")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a '{kind}' experiment")
        p.add_argument("--config", required=True, help="TOML run file (or manifest.json)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--workers", type=int, default=1,
                       help="parallel sweep members (sweep only)")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        data = read_config_data(args.config)
        if data.get("kind", args.kind) != args.kind:
            raise ConfigError(
                f"kind: config file says {data['kind']!r} but the "
                f"subcommand is {args.kind!r}")
        data["kind"] = args.kind
        rc = resolve_config(data)
        outdir = run_experiment(rc, args.out, workers=args.workers,
                                quiet=args.quiet)
    except GlvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return getattr(exc, "exit_code", 3)
    if not args.quiet:
        print(f"wrote {outdir}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
