"""Command-line entry point.

Subcommands: lln, clt, oracle (each runs one experiment and writes reports),
limits (dumps the limit table for the configured model), and
`partitions audit` (exhaustive join-bound verification).

Exit codes: 0 success, 1 acceptance failure, 2 configuration error,
3 numerical error.
"""

from __future__ import annotations

import argparse
import sys

from .config import ExperimentConfig
from .errors import (
    CapacityError,
    ConfigurationError,
    DomainError,
    NumericalError,
    ValidationError,
)
from .harness import emit_limit_table, emit_reports, run_clt, run_lln, run_oracle_check
from .partitions import audit_join_bounds

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bandspectra",
        description="Banded covariance spectra: experiments and audits",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("lln", "law-of-large-numbers experiment"),
        ("clt", "central-limit-theorem experiment"),
        ("oracle", "exact-vs-Monte-Carlo cumulant cross-check"),
        ("limits", "dump the limit table for the configured model"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--workers", type=int, help="override the worker count")
    pa = sub.add_parser("partitions", help="partition-lattice audits")
    pa.add_argument("action", choices=["audit"])
    pa.add_argument("--k", type=int, required=True, help="half the ground-set size")
    pa.add_argument("--allow-large", action="store_true", help="raise the audit cap to 5")
    return parser


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.from_json_file(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.out is not None:
        config.out_dir = args.out
    if args.workers is not None:
        config.workers = args.workers
    # the oracle cross-check is exact at any bandwidth, including zero
    config.validate(min_bandwidth=0 if args.command == "oracle" else 1)
    return config


def _run_experiment(args) -> int:
    config = _load_config(args)
    if args.command == "limits":
        path = emit_limit_table(config, config.out_dir)
        print(f"wrote {path}")
        return EXIT_OK
    runner = {"lln": run_lln, "clt": run_clt, "oracle": run_oracle_check}[args.command]
    report = runner(config)
    written = emit_reports(report, config.out_dir)
    for row in report.summary_rows():
        print(",".join("" if v == "" else str(v) for v in row))
    print(f"runtime: {report.runtime:.1f}s; wrote {', '.join(str(w) for w in written)}")
    if not report.all_pass:
        print("FAIL: at least one comparison missed its tolerance")
        return EXIT_FAIL
    return EXIT_OK


def _run_partitions(args) -> int:
    report = audit_join_bounds(args.k, allow_large=args.allow_large)
    print(
        f"k={report.k}: checked {report.triples_checked} triples, "
        f"{len(report.violations)} violations, max slack {report.max_slack}"
    )
    for r in sorted(report.slack_by_r):
        print(f"  r={r}: max slack {report.slack_by_r[r]}")
    return EXIT_OK if report.ok else EXIT_FAIL


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "partitions":
            return _run_partitions(args)
        return _run_experiment(args)
    except (ValidationError, ConfigurationError, CapacityError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
