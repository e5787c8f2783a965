"""Command line entry point: one subcommand per experiment kind.

Exit status is 0 on success, 1 for bad arguments or parameters and 2 when
a run records an invariant violation.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .errors import InvariantViolation, PermunivError
from .experiments import ExperimentConfig, auto_cap, render, resolve_n, run_experiment

COMMANDS = {
    "universality": "universality",
    "containment": "containment",
    "scan": "scan_success",
    "ldelta": "ldelta_survey",
    "decompose": "decomposition_sweep",
    "coupling": "coupling_audit",
}
EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _cap(text: str):
    if text == "auto":
        return text
    return None if text in ("none", "off") else int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="permuniv", description="Seeded experiments on permutation universality.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "universality": "estimate Pr(random sigma in S_n is k-universal)",
        "containment": "avoidance frequencies for a pattern panel",
        "scan": "greedy thread scans on fair random 2k x m matrices",
        "ldelta": "survey of the longest shift statistic of uniform permutations",
        "decompose": "quasirandom/structured decomposition sweep",
        "coupling": "audit the matrix coupling implication chain",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--k", type=int, required=True)
        p.add_argument("--n", help="length: integer or preset quarter[:eps], square20, loglog")
        p.add_argument("--m", type=int, help="matrix width (scan)")
        p.add_argument("--trials", type=int, default=1000)
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--cap", type=_cap, default=None, help="integer, or 'auto' for ceil(log^2 k)")
        p.add_argument("--alpha", type=float, default=0.1)
        p.add_argument("--q", type=int, default=5)
        p.add_argument("--pattern", action="append", default=[], help="pattern in one-line notation (repeatable)")
        p.add_argument("--exhaustive", action="store_true", help="enumerate all of S_n (n <= 7)")
        p.add_argument("--per-delta", action="store_true", help="ldelta: keep every L_delta per trial")
        p.add_argument("--timing", action="store_true", help="add per-trial wall_time (breaks byte identity)")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="output file (default stdout)")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    kind = COMMANDS[args.command]
    multiple = 4 * args.k if kind in ("coupling_audit", "scan_success") else 1
    n = resolve_n(args.n, args.k, multiple) if args.n is not None else None
    cap = auto_cap(args.k) if args.cap == "auto" else args.cap
    return ExperimentConfig(
        kind=kind, k=args.k, n=n, m=args.m, trials=args.trials, master_seed=args.seed,
        threads=args.threads, cap=cap, alpha=args.alpha, q=args.q,
        patterns=list(args.pattern), exhaustive=args.exhaustive, per_delta=args.per_delta,
        timing=args.timing, workers=args.workers, output_path=args.out, format=args.format,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        result = run_experiment(config)
    except InvariantViolation as exc:
        print(f"permuniv: invariant violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (PermunivError, ValueError) as exc:
        print(f"permuniv: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(result)
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for v in result.violations[:20]:
        print(f"permuniv: violation: {v}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
