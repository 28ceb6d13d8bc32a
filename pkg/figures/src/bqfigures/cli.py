"""Command-line surface: `figures render --kind KIND --in DIR --out PATH`."""

from __future__ import annotations

import argparse
import sys

from .render import render
from .schemas import KINDS, SchemaMismatch


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="figures",
        description="Render figures from bertrandq CSV result directories",
    )
    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("render", help="render one figure kind")
    sp.add_argument("--kind", required=True, choices=KINDS)
    sp.add_argument("--in", dest="in_dir", required=True, help="results directory")
    sp.add_argument("--out", required=True, help="output image path")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out = render(args.kind, args.in_dir, args.out)
    except SchemaMismatch as e:
        print(f"schema mismatch in {e.path}", file=sys.stderr)
        if e.missing:
            print(f"  missing columns: {', '.join(e.missing)}", file=sys.stderr)
        if e.unexpected:
            print(f"  unexpected columns: {', '.join(e.unexpected)}", file=sys.stderr)
        return 1
    except (ValueError, OSError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(out)
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
