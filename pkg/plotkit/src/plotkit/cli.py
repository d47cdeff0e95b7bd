"""plotkit command line: render-derivatives / render-residuals."""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from .render import SchemaError, render_derivative_growth, render_residual_decay


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plotkit", description="Render qgas CSV outputs")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("render-derivatives", help="derivative-growth figure (log y)")
    sp.add_argument("--csv", action="append", required=True, help="repeatable input path")
    sp.add_argument("--out", required=True)
    sp.set_defaults(renderer=render_derivative_growth)

    sp = sub.add_parser("render-residuals", help="residual-decay figure (log-log)")
    sp.add_argument("--csv", action="append", required=True)
    sp.add_argument("--out", required=True)
    sp.set_defaults(renderer=render_residual_decay)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.renderer(args.csv, args.out)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
