"""Command-line entry point: ``tangentdp {certify,loo,estimate,fdcheck} --config cfg.json``.

Exit codes: 0 success, 2 validation failure, 3 bound violation or failed
check, 4 I/O or parse error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .audit import EXIT_IO, EXIT_VALIDATION, NORM_PAIRS, RUNNERS, AuditConfig, emit_csv
from .errors import ParseError, StepTooLarge, TangentDPError
from .io import dumps_report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tangentdp", description="Certify and audit tangent differential privacy of Gibbs mechanisms.")
    sub = parser.add_subparsers(dest="verb", required=True)
    helps = {
        "certify": "compare exact tangent-map norms with the 2*beta*R bound",
        "loo": "leave-one-out audit of every (or selected) data atom",
        "estimate": "Monte Carlo estimate of the theorem constant R",
        "fdcheck": "finite-difference check of the linearizations along leave-one-out directions",
    }
    for verb, text in helps.items():
        p = sub.add_parser(verb, help=text)
        p.add_argument("--config", required=True, type=Path, help="JSON audit config")
        p.add_argument("--beta", type=float)
        p.add_argument("--norm-pair", choices=NORM_PAIRS)
        p.add_argument("--seed", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--out", type=Path, help="write the JSON report here (default: config output_path or stdout)")
        p.add_argument("--emit-csv", type=Path, metavar="DIR", help="also write flat CSVs for plotting")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = AuditConfig.load(args.config).with_overrides(
            beta=args.beta,
            norm_pair=args.norm_pair,
            seed=args.seed,
            samples=args.samples,
            output_path=args.out,
        )
        report, code = RUNNERS[args.verb](config)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except StepTooLarge as exc:
        print(f"error: infeasible step h={exc.step!r}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except TangentDPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    text = dumps_report(report)
    try:
        if config.output_path is not None:
            Path(config.output_path).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        if args.emit_csv is not None:
            emit_csv(report, args.emit_csv)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
