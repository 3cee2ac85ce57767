#!/usr/bin/env python3
"""
Command-line front end for the MQMI library and verification harness.

Subcommands: check (evaluate one quantity on one partition), repro (rebuild a
registered counterexample), sweep (run checks over a random ensemble), search
(hunt for a counterexample), table (regenerate the property table).

Exit codes: 0 expected outcome, 1 unexpected mathematical outcome,
2 usage or validation error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import pandas as pd

from config_loader import ConfigError, cli_settings
from entropy import EntropyError
from mqmi import KINDS, MqmiError, MqmiSpec, mqmi, mqmi_all_coarsenings
from partitions import Partition, PartitionError
from states import (
    additivity_state,
    bell_state,
    classical_two_term,
    ghz_mixture,
    ghz_state,
    markov_demo_spec,
    markov_state,
)
from tensor_core import DensityMatrix, SubsystemLayout, TensorError, load_state, save_state
from verify.checks import CHECKS
from verify.registry import CASES, expected_outcome, reproduce_counterexample
from verify.report import COUNTEREXAMPLE, ENSEMBLES, FAIL, CheckReport, SweepConfig, VerificationError, write_json
from verify.search import SEARCH_TARGETS, get_target, search
from verify.sweep import run_sweep
from verify.table import build_table, claimed_to_hold

logger = logging.getLogger("mqmi_cli")

BUILTINS: dict[str, Callable[[], DensityMatrix]] = {
    "ghz3": lambda: ghz_state(3),
    "ghz-mixture-half": lambda: ghz_mixture(0.5),
    "classical-half": lambda: classical_two_term(0.5),
    "additivity-state": additivity_state,
    "markov-demo": lambda: markov_state(markov_demo_spec()),
    "bell-pair": lambda: bell_state("AB"),
}

KIND_CHOICES = KINDS + ("I'", "I''", "Iq'", "Iq''")
FORMATS = ("table", "csv", "json")

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2

_VALIDATION_ERRORS = (
    TensorError,
    EntropyError,
    PartitionError,
    MqmiError,
    VerificationError,
    ConfigError,
    OSError,
    json.JSONDecodeError,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; keep the message in the [error] register."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"[error] {message}\n")


def _add_spec_flags(parser: argparse.ArgumentParser, *, kind_default: Optional[str] = "I") -> None:
    parser.add_argument("--kind", choices=KIND_CHOICES, default=kind_default, help="Quantity to evaluate.")
    parser.add_argument("--q", type=float, help="Tsallis parameter (> 1) for Iq, Iqprime, Iqdprime.")


def _add_output_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, help="Write the JSON report here.")
    parser.add_argument("--format", choices=FORMATS, help="Stdout format (default from config.yaml).")


def build_parser(seed_default: int, samples_default: int) -> argparse.ArgumentParser:
    parser = _Parser(prog="mqmi_cli.py", description="Multipartite quantum mutual information toolkit.")
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    check = sub.add_parser("check", help="Evaluate one quantity on one partition.")
    source = check.add_mutually_exclusive_group(required=True)
    source.add_argument("--builtin", choices=sorted(BUILTINS), help="Named fixture state.")
    source.add_argument("--state", type=Path, help="State file (JSON: parties + [re, im] matrix entries).")
    check.add_argument("--partition", required=True, help='Partition text such as "AB|CD|E".')
    check.add_argument("--all-coarsenings", action="store_true", help="Also print every coarser partition's value.")
    _add_spec_flags(check)
    _add_output_flags(check)

    repro = sub.add_parser("repro", help="Reproduce a registered counterexample.")
    repro.add_argument("--case", required=True, choices=sorted(CASES) + ["all"], help="Case id, or all.")
    _add_output_flags(repro)

    sweep = sub.add_parser("sweep", help="Run checks over a random ensemble.")
    sweep.add_argument("--ensemble", choices=ENSEMBLES, default="hs-mixed")
    sweep.add_argument("--parties", default="A:2,B:2,C:2", help="Layout as label:dim,...")
    sweep.add_argument("--samples", type=int, default=samples_default)
    sweep.add_argument("--seed", type=int, default=seed_default)
    sweep.add_argument("--rank", type=int, help="Rank of hs-mixed samples (default: full rank).")
    sweep.add_argument("--check", action="append", choices=sorted(CHECKS), help="Check to run (repeatable).")
    _add_spec_flags(sweep)
    _add_output_flags(sweep)

    hunt = sub.add_parser("search", help="Hill-climb toward a counterexample.")
    hunt.add_argument("--target", required=True, choices=sorted(SEARCH_TARGETS))
    hunt.add_argument("--q", type=float, default=2.0)
    hunt.add_argument("--budget", type=int, help="Margin evaluations (default from config.yaml).")
    hunt.add_argument("--seed", type=int, default=seed_default)
    _add_output_flags(hunt)

    table = sub.add_parser("table", help="Regenerate the property table from evidence.")
    table.add_argument("--q", type=float, default=2.0)
    table.add_argument("--samples", type=int, help="States per sweep (default from config.yaml).")
    table.add_argument("--budget", type=int, help="Search budget for the Iq' negativity cell.")
    table.add_argument("--seed", type=int, default=seed_default)
    _add_output_flags(table)
    return parser


def configure_logging(level: str, fmt: str, verbose: bool) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else level, format=fmt, stream=sys.stderr, force=True)


def _status(message: str) -> None:
    print(message, file=sys.stderr)


def _load_source(args: argparse.Namespace) -> DensityMatrix:
    if args.builtin:
        return BUILTINS[args.builtin]()
    return load_state(args.state)


def _emit(frame: pd.DataFrame, payload: Any, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False))
    elif fmt == "csv":
        sys.stdout.write(frame.to_csv(index=False))
    else:
        print(frame.to_string(index=False))


def _reports_frame(reports: Sequence[CheckReport]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "check": r.check_id,
                "kind": str(r.spec) if r.spec is not None else "",
                "verdict": r.verdict,
                "samples": r.samples,
                "min_margin": r.min_margin,
                "alpha": r.alpha,
            }
            for r in reports
        ]
    )


def _write_reports(reports: Sequence[CheckReport], out: Optional[Path]) -> None:
    if out is None:
        return
    payload: Any = reports[0].to_dict() if len(reports) == 1 else [r.to_dict() for r in reports]
    _status(f"[report] written -> {write_json(payload, out)}")


def _print_reports(reports: Sequence[CheckReport], fmt: str) -> None:
    if fmt == "table":
        for report in reports:
            print(report.summary())
        return
    _emit(_reports_frame(reports), [r.to_dict() for r in reports], fmt)


def cmd_check(args: argparse.Namespace, fmt: str) -> int:
    rho = _load_source(args)
    spec = MqmiSpec.parse(args.kind, args.q)
    partition = Partition.parse(args.partition, rho.labels)
    values = [mqmi(rho, partition, spec)]
    if args.all_coarsenings:
        values += [v for p, v in mqmi_all_coarsenings(rho, partition, spec).items() if p != partition]
    if fmt == "table":
        for value in values:
            echo = f"kind={spec.kind}" + (f" q={spec.q:g}" if spec.is_tsallis else "")
            shown = round(value.value, 12) + 0.0
            print(f"{shown:.9f}  [{echo} partition={value.partition}]")
    else:
        rows = [value.to_dict() for value in values]
        _emit(pd.DataFrame(rows), rows if len(rows) > 1 else rows[0], fmt)
    if args.out is not None:
        payload = [v.to_dict() for v in values] if len(values) > 1 else values[0].to_dict()
        _status(f"[report] written -> {write_json(payload, args.out)}")
    return EXIT_OK


def cmd_repro(args: argparse.Namespace, fmt: str) -> int:
    case_ids = sorted(CASES) if args.case == "all" else [args.case]
    reports = [reproduce_counterexample(case_id) for case_id in case_ids]
    _print_reports(reports, fmt)
    _write_reports(reports, args.out)
    unexpected = [r.check_id for r in reports if not expected_outcome(r)]
    if unexpected:
        print(f"[repro] unexpected outcome: {', '.join(unexpected)}", file=sys.stderr)
        return EXIT_UNEXPECTED
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace, fmt: str) -> int:
    spec = MqmiSpec.parse(args.kind, args.q)
    config = SweepConfig(
        ensemble=args.ensemble,
        layout=SubsystemLayout.parse(args.parties),
        samples=args.samples,
        seed=args.seed,
        rank=args.rank,
    )
    checks = args.check or ["coarsening", "triangle"]
    reports = run_sweep(config, checks, spec)
    _print_reports(reports, fmt)
    _write_reports(reports, args.out)
    pure = config.ensemble == "haar-pure"
    unexpected = [
        r.check_id
        for r in reports
        if r.verdict == FAIL or (r.verdict == COUNTEREXAMPLE and claimed_to_hold(r.check_id, spec, pure=pure))
    ]
    if unexpected:
        print(f"[sweep] unexpected counterexample for {spec}: {', '.join(unexpected)}", file=sys.stderr)
        return EXIT_UNEXPECTED
    return EXIT_OK


def cmd_search(args: argparse.Namespace, fmt: str) -> int:
    report = search(args.target, q=args.q, budget=args.budget, seed=args.seed)
    _print_reports([report], fmt)
    _write_reports([report], args.out)
    if args.out is not None and report.witness is not None and report.witness.state is not None:
        witness_path = args.out.with_suffix(".witness.json")
        _status(f"[search] witness -> {save_state(report.witness.state, witness_path)}")
    if report.verdict == FAIL:
        return EXIT_UNEXPECTED
    if report.witness is None and get_target(args.target).expect_witness:
        _status(f"[search] no witness for {args.target} within budget={report.details.get('budget')}")
        return EXIT_UNEXPECTED
    return EXIT_OK


def cmd_table(args: argparse.Namespace, fmt: str) -> int:
    report = build_table(
        q=args.q,
        seed=args.seed,
        samples=args.samples,
        search_budget=args.budget,
        progress=lambda row: logger.info("[table] evaluating row=%s", row),
    )
    if fmt == "json":
        print(json.dumps(report.to_dict(), sort_keys=True, indent=2, ensure_ascii=False))
    elif fmt == "csv":
        sys.stdout.write(report.evidence_frame().to_csv(index=False))
    else:
        print(report.to_frame().to_string())
        print("legend: ✓ holds on every evaluated state, × counterexample found, — not defined,")
        print("        ? inconclusive; marks are evidence from finite sweeps, not proofs")
        for cell in report.cells:
            if not cell.agrees:
                status = "registered" if cell.registered else "UNEXPECTED"
                print(f"  {status}: {cell.row}/{cell.column} evidence={cell.mark} claimed={cell.claimed}")
    if args.out is not None:
        _status(f"[report] written -> {write_json(report.to_dict(), args.out)}")
    return EXIT_OK if report.passed else EXIT_UNEXPECTED


COMMANDS: dict[str, Callable[[argparse.Namespace, str], int]] = {
    "check": cmd_check,
    "repro": cmd_repro,
    "sweep": cmd_sweep,
    "search": cmd_search,
    "table": cmd_table,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        settings = cli_settings()
    except ConfigError as exc:
        print(f"[error] {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser = build_parser(settings.seed, settings.samples)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    configure_logging(settings.log_level, settings.log_format, args.verbose)
    fmt = args.format or settings.output_format
    try:
        return COMMANDS[args.command](args, fmt)
    except _VALIDATION_ERRORS as exc:
        print(f"[error] {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
