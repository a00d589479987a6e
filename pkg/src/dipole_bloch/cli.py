"""Command-line scenario runner.

    dipole-bloch scenario.cfg
    dipole-bloch --print-defaults > scenario.cfg

Exit status: 0 all checks pass, 1 a check failed, 2 bad config or runtime error.
"""

from __future__ import annotations

import argparse
import sys

from .scenario import DEFAULTS_TEXT, ConfigError, parse_config, run_scenario


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dipole-bloch", description="Simulate a driven two-level dipole and check its identities.")
    p.add_argument("config", nargs="?", help="scenario file (key=value lines)")
    p.add_argument("--print-defaults", action="store_true", help="print a documented default scenario and exit")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_defaults:
        sys.stdout.write(DEFAULTS_TEXT)
        return 0
    if args.config is None:
        parser.error("a config path is required (or use --print-defaults)")
    try:
        with open(args.config) as fh:
            cfg = parse_config(fh.read())
    except (OSError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        result = run_scenario(cfg)
    except Exception as exc:  # any simulation/analysis failure maps to exit 2
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    for line in result.report:
        print(line)
    return result.status


if __name__ == "__main__":
    sys.exit(main())
