"""
Command-line entry point.

Usage:
    structured-pursuit factorize data.csv --mode sparse-pca --sparsity-u 10 --rank 3 --covariance
    structured-pursuit complete ratings.dat --rank 10 --corrections 2 --split 0.5,0.2,0.3
    structured-pursuit coherence dictionary.csv --m-range 1:5

Exit codes: 0 success, 2 usage error, 3 input parse error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Sequence

from structured_pursuit import __version__
from structured_pursuit.errors import (
    InputParseError,
    LmoFailureError,
    NumericalFailureError,
)
from structured_pursuit.pursuit import CorrectionMethod
from structured_pursuit.sources.loader import SourceFormat
from structured_pursuit.tools.coherence import cmd_coherence
from structured_pursuit.tools.complete import DEFAULT_SPLIT, cmd_complete
from structured_pursuit.tools.factorize import cmd_factorize
from structured_pursuit.tools.modes import CompletionMode, FactorMode

logger = logging.getLogger("structured-pursuit")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_NUMERICAL = 4

_FORMATS = [f.value for f in SourceFormat]


def _add_structure_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sparsity-u", type=int, default=None, help="Nonzeros per left factor")
    parser.add_argument("--sparsity-v", type=int, default=None, help="Nonzeros per right factor")
    parser.add_argument("--nonneg-u", action="store_true", help="Non-negative left factors")
    parser.add_argument("--nonneg-v", action="store_true", help="Non-negative right factors")


def _add_pursuit_flags(parser: argparse.ArgumentParser, default_rank: int) -> None:
    parser.add_argument("--rank", type=int, default=default_rank,
                        help=f"Rank budget (default: {default_rank})")
    parser.add_argument("--corrections", type=int, default=0, metavar="PASSES",
                        help="Cyclic atom-correction passes per iteration (default: 0)")
    parser.add_argument("--correction-method", choices=[m.value for m in CorrectionMethod],
                        default=CorrectionMethod.AUTO.value,
                        help="How corrections propose atoms (default: auto, alternating least "
                             "squares for partially observed targets)")
    parser.add_argument("--restarts", type=int, default=5, help="LMO restarts (default: 5)")
    parser.add_argument("--power-iters", type=int, default=250,
                        help="Power iterations per restart (default: 250)")
    parser.add_argument("--gap-tol", type=float, default=1e-8,
                        help="Relative Frank-Wolfe gap tolerance (default: 1e-8)")
    parser.add_argument("--delta", type=float, default=1.0,
                        help="LMO accuracy in (0, 1]; below 1 degrades every LMO result")
    parser.add_argument("--seed", type=int, default=0, help="Random seed (default: 0)")
    parser.add_argument("--workers", type=int, default=1,
                        help="Threads for LMO restarts (default: 1)")
    parser.add_argument("--out", default=None,
                        help="Output directory for report.json, factors.json and trace.csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="structured-pursuit",
        description="Greedy structured low-rank matrix factorization and completion.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    factorize = commands.add_parser("factorize", help="Structured low-rank approximation")
    factorize.add_argument("input", help="Input matrix file")
    factorize.add_argument("--format", choices=_FORMATS, default=SourceFormat.DENSE_CSV.value,
                           help="Input format (default: csv)")
    factorize.add_argument("--mode", choices=[m.value for m in FactorMode],
                           default=FactorMode.SVD.value, help="Atom sets to use (default: svd)")
    factorize.add_argument("--symmetric", action="store_true",
                           help="Symmetric factorization (v = u)")
    factorize.add_argument("--covariance", action="store_true",
                           help="Factorize the sample covariance of a samples x features input")
    _add_structure_flags(factorize)
    _add_pursuit_flags(factorize, default_rank=5)

    complete = commands.add_parser("complete", help="Matrix completion with rank selection")
    complete.add_argument("input", help="Rating triples or coordinate file")
    complete.add_argument("--format", choices=_FORMATS, default=SourceFormat.RATING_TRIPLES.value,
                          help="Input format (default: ratings)")
    complete.add_argument("--mode", choices=[m.value for m in CompletionMode],
                          default=CompletionMode.PLAIN.value, help="plain or sparse (default: plain)")
    complete.add_argument("--split", default=DEFAULT_SPLIT,
                          help=f"Train,validation,test fractions (default: {DEFAULT_SPLIT})")
    complete.add_argument("--skip-test", action="store_true",
                          help="Do not evaluate on the test split")
    _add_structure_flags(complete)
    _add_pursuit_flags(complete, default_rank=10)

    coherence = commands.add_parser("coherence", help="Cumulative coherence of a dictionary")
    coherence.add_argument("input", help="Dictionary CSV, one atom per row")
    coherence.add_argument("--m-range", default=None, help="'m', 'a:b' or 'a-b' (default: all)")
    coherence.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    return parser


def _run(args: argparse.Namespace) -> None:
    if args.command == "coherence":
        result = cmd_coherence(args.input, args.m_range, args.out)
        if args.out is None:
            sys.stdout.write(result["csv"])
        return

    common = dict(
        sparsity_u=args.sparsity_u,
        sparsity_v=args.sparsity_v,
        nonneg_u=args.nonneg_u,
        nonneg_v=args.nonneg_v,
        rank=args.rank,
        corrections=args.corrections,
        correction_method=args.correction_method,
        restarts=args.restarts,
        power_iters=args.power_iters,
        gap_tol=args.gap_tol,
        delta=args.delta,
        seed=args.seed,
        out_dir=args.out,
        workers=args.workers,
    )
    if args.command == "factorize":
        report = cmd_factorize(
            args.input, args.format, args.mode, symmetric=args.symmetric,
            covariance=args.covariance, **common,
        )
    else:
        report = cmd_complete(
            args.input, args.format, args.split, mode=args.mode, skip_test=args.skip_test,
            **common,
        )
    if args.out is None:
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(json.dumps(report.details["outputs"], indent=2) + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("LOG_LEVEL", "INFO").upper())
    args = build_parser().parse_args(argv)
    try:
        _run(args)
    except InputParseError as exc:
        logger.error("%s", exc)
        return EXIT_INPUT
    except (NumericalFailureError, LmoFailureError) as exc:
        logger.error("%s", exc)
        return EXIT_NUMERICAL
    except ValueError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
