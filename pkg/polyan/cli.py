"""Command-line dispatcher.

    polyan <command> [--in PATH]... [--out PATH] [--q N] [--alpha a,b,...]
                     [--tol X] [--set FIELD=VALUE]... [--seed N] [...]

Exit codes: 0 success, 1 negative mathematical verdict (report still
written), 2 input or usage error (diagnostic on stderr).
"""

from __future__ import annotations

import argparse
import sys
from typing import Dict, List, Optional

from loguru import logger

from . import codecs, config
from .commands import PRIMARY_TOLERANCE, Outcome, Request, registry
from .errors import InputError, ParseError, PolyanError, VerdictError

COMMANDS = (
    "eval", "order", "modulus", "fit", "directions", "dirichlet",
    "rado", "hartogs", "levi", "discs", "trace",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyan", description="Polyanalytic function toolkit.")
    parser.add_argument("command", nargs="?", choices=COMMANDS)
    parser.add_argument("--in", dest="inputs", action="append", default=[], help="Input file; repeat for several.")
    parser.add_argument("--out", help="JSON report path (stdout when omitted).")
    parser.add_argument("--q", type=int)
    parser.add_argument("--alpha", help="Comma-separated multi-index, e.g. 2,3.")
    parser.add_argument("--tol", type=float, help="The command's primary tolerance.")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="FIELD=VALUE")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--at", help="Evaluation point z1,z2,... (complex literals).")
    parser.add_argument("--base", help="Base point of a point set.")
    parser.add_argument("--h", type=float, help="Lattice step.")
    parser.add_argument("--degree", type=int)
    parser.add_argument("--target", type=float, help="Approximation target for dirichlet.")
    parser.add_argument("--field", dest="field_out", help="CSV path for computed grid fields.")
    parser.add_argument("--heatmap", help="Portable pixmap path.")
    parser.add_argument("--strict", action="store_true", help="rado: a derivative jump is an error.")
    parser.add_argument("--defaults", action="store_true", help="Print the tolerance table and exit.")
    return parser


def _alpha(text: Optional[str]):
    if text is None:
        return None
    try:
        return tuple(int(a) for a in text.split(","))
    except ValueError as e:
        raise ParseError("alpha must be comma-separated integers", {"value": text}) from e


def _tolerances(args: argparse.Namespace) -> config.Tolerances:
    values: Dict[str, str] = {}
    for item in args.overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise ParseError("--set expects FIELD=VALUE", {"value": item})
        values[key.strip()] = value.strip()
    if args.tol is not None:
        if args.command not in PRIMARY_TOLERANCE:
            raise ParseError("command has no primary tolerance", {"command": args.command})
        values[PRIMARY_TOLERANCE[args.command]] = args.tol
    return config.Tolerances.from_env().override(**values)


def _configure_logging() -> None:
    logger.remove()
    logger.add(sys.stderr, level=config.LOG_LEVEL, format="{level: <8} | {name}:{function} - {message}")
    logger.enable("polyan")


def _emit(payload: Dict, out: Optional[str]) -> None:
    if out:
        codecs.write_json(payload, out)
    else:
        sys.stdout.write(codecs.dumps(payload))


def run(argv: Optional[List[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2

    if args.defaults:
        _emit(config.defaults_table(), args.out)
        return 0
    if args.command is None:
        sys.stderr.write("polyan: a command is required\n")
        return 2

    previous = config.DEFAULTS
    try:
        config.activate(_tolerances(args))
        req = Request(
            command=args.command, inputs=args.inputs, out=args.out, q=args.q,
            alpha=_alpha(args.alpha), seed=args.seed, at=args.at, heatmap=args.heatmap,
            field_out=args.field_out, h=args.h, degree=args.degree, base=args.base,
            target=args.target, strict=args.strict,
        )
        logger.debug("running {} on {}", req.command, req.inputs)
        outcome: Outcome = registry()[req.command](req)
        _emit({"command": req.command, **outcome.payload}, args.out)
        return 1 if outcome.negative else 0
    except VerdictError as e:
        logger.info("negative verdict: {}", e.message)
        try:
            _emit({"command": args.command, "verdict": "negative", **e.to_dict()}, args.out)
        except InputError as io:
            sys.stderr.write(f"polyan: {io.message}\n")
            return 2
        return 1
    except PolyanError as e:
        sys.stderr.write(f"polyan: {type(e).__name__}: {e.message}\n")
        if e.details:
            sys.stderr.write(codecs.dumps(e.details))
        return 2
    finally:
        config.activate(previous)


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
