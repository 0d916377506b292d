"""Command-line entry points: run a full generation (datasets + reports +
manifest) and re-verify a finished run directory.

Exit codes: 0 ok, 1 configuration error, 2 I/O error, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import analytics, datasets, verify
from .config import Layout, LayoutError, load_layout, preset, save_layout
from .engine import RunSinks, run_simulation

TOOL_VERSION = "0.1.0"
OUT_DIR_ENV = "LOANSIM_OUT"

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_VERIFY = 3

CASE_ALIASES = {"app": "app_case", "beh": "beh_case"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loansim",
        description="Deterministic synthetic installment-loan portfolio generator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="generate datasets and reports")
    source = run_p.add_mutually_exclusive_group(required=True)
    source.add_argument("--case", choices=sorted(CASE_ALIASES) + sorted(CASE_ALIASES.values()))
    source.add_argument("--config", type=Path, help="layout document (JSON or YAML)")
    run_p.add_argument("--seed", type=int, default=None, help="override the layout seed")
    run_p.add_argument("--scale", type=float, default=None, help="override volume_scale")
    run_p.add_argument(
        "--out",
        type=Path,
        default=None,
        help=f"output directory (default: ${OUT_DIR_ENV} or ./loansim-out)",
    )
    run_p.add_argument(
        "--reports",
        default="all",
        help="'all', 'none', or comma list of "
        + "|".join(analytics.REPORT_GROUPS),
    )
    run_p.add_argument("--threads", type=int, default=1, help="worker threads (output identical)")

    verify_p = sub.add_parser("verify", help="re-check invariants of a run directory")
    verify_p.add_argument("out_dir", type=Path)
    return parser


def resolve_layout(args) -> Layout:
    if args.case is not None:
        layout = preset(CASE_ALIASES.get(args.case, args.case))
    else:
        layout = load_layout(args.config)
    if args.seed is not None:
        layout = dataclasses.replace(layout, seed=args.seed)
    if args.scale is not None:
        layout = dataclasses.replace(layout, volume_scale=args.scale)
    problems = layout.violations()
    if problems:
        raise LayoutError("; ".join(problems))
    return layout


def report_groups(spec: str) -> tuple[str, ...]:
    if spec == "all":
        return analytics.REPORT_GROUPS
    if spec == "none":
        return ()
    groups = tuple(g.strip() for g in spec.split(",") if g.strip())
    unknown = set(groups) - set(analytics.REPORT_GROUPS)
    if unknown:
        raise LayoutError(
            f"unknown report groups {sorted(unknown)}; choose from {analytics.REPORT_GROUPS}"
        )
    return groups


def run_command(args) -> int:
    try:
        layout = resolve_layout(args)
        groups = report_groups(args.reports)
    except LayoutError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = args.out or Path(os.environ.get(OUT_DIR_ENV, "loansim-out"))
    started = datetime.now(timezone.utc)
    t0 = time.time()
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        save_layout(layout, out_dir / verify.LAYOUT_FILE)

        with (
            datasets.CsvBatchWriter(
                out_dir / datasets.PRODUCTION_FILE, datasets.PRODUCTION_CSV_COLUMNS
            ) as prod_writer,
            datasets.CsvBatchWriter(
                out_dir / datasets.TRANSACTION_FILE, datasets.TRANSACTION_CSV_COLUMNS
            ) as txn_writer,
            datasets.CsvBatchWriter(out_dir / datasets.ABT_FILE, datasets.ABT_CSV_COLUMNS) as abt_writer,
        ):
            sinks = RunSinks(
                production=lambda b: prod_writer.write(datasets.production_batch_frame(b, layout)),
                transactions=lambda b: txn_writer.write(datasets.transaction_batch_frame(b)),
                abt=lambda b: abt_writer.write(datasets.abt_batch_frame(b)),
            )
            result = run_simulation(
                layout,
                collect=False,
                sinks=sinks,
                threads=max(args.threads, 1),
                keep_stratum_stats=False,
            )

        report_paths: list[str] = []
        if groups:
            txn = datasets.read_transactions(out_dir / datasets.TRANSACTION_FILE)
            production = datasets.read_production(out_dir / datasets.PRODUCTION_FILE)
            features = datasets.read_abt(out_dir / datasets.ABT_FILE)
            case_label = CASE_ALIASES.get(args.case, args.case) if args.case else "custom"
            report_paths = analytics.write_reports(
                txn, production, features, layout, out_dir, case_label, groups
            )
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO

    manifest = {
        "tool_version": TOOL_VERSION,
        "layout_digest": layout.digest(),
        "seed": layout.seed,
        "volume_scale": layout.volume_scale,
        "started_utc": started.isoformat(),
        "finished_utc": datetime.now(timezone.utc).isoformat(),
        "elapsed_seconds": round(time.time() - t0, 3),
        "rows": {
            "production": result.production_rows,
            "transaction": result.transaction_rows,
            "abt": result.abt_rows,
        },
        "outputs": {
            "production": str(out_dir / datasets.PRODUCTION_FILE),
            "transaction": str(out_dir / datasets.TRANSACTION_FILE),
            "abt": str(out_dir / datasets.ABT_FILE),
            "reports": report_paths,
        },
    }
    (out_dir / verify.MANIFEST_FILE).write_text(json.dumps(manifest, indent=2) + "\n")
    print(
        f"run complete: {result.production_rows} applications, "
        f"{result.transaction_rows} transaction rows, {result.abt_rows} feature rows "
        f"in {manifest['elapsed_seconds']}s -> {out_dir}"
    )
    return EXIT_OK


def verify_command(args) -> int:
    out_dir: Path = args.out_dir
    if not out_dir.exists():
        print(f"verification failed: missing dataset directory {out_dir}", file=sys.stderr)
        return EXIT_VERIFY
    try:
        violations = verify.verify_run_dir(out_dir)
    except LayoutError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    if violations:
        print(f"verification failed with {len(violations)} violation(s):", file=sys.stderr)
        for v in violations[: verify.MAX_REPORTED]:
            print(f"  - {v}", file=sys.stderr)
        return EXIT_VERIFY
    print("verification passed")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return run_command(args)
    return verify_command(args)


if __name__ == "__main__":
    sys.exit(main())
