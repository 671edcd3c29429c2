"""Command-line interface.

Exit codes: 0 on success, 1 for validation/config errors (including manifest
violations and usage mistakes), 2 for runtime failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .adapter import AdapterError
from .filtering import normalize_text
from .metrics import (
    aggregate_ratings,
    bleu,
    corpus_stats,
    load_rating_sheets,
    render_stats_table,
)
from .pipeline import load_config, run_pipeline, validate_manifest
from .pipeline.config import ConfigError
from .pipeline.manifest import export_manifest_csv, read_manifest
from .pipeline.run import PipelineError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2

# CLI subcommand -> last pipeline stage it runs.
STAGE_COMMANDS = {
    "parse": "merge",
    "segment": "segment",
    "asr": "asr",
    "filter": "duration_filter",
    "pair": "speaker_count_filter",
    "units": "units",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dubpair",
        description="Build paired bilingual speech corpora from dubbed media tracks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_all = sub.add_parser("run-all", help="run every stage and write the manifest")
    run_all.add_argument("--config", required=True)
    run_all.add_argument(
        "--csv", action="store_true", help="also export manifest.csv next to the manifest"
    )

    for name in STAGE_COMMANDS:
        stage_parser = sub.add_parser(name, help=f"run the pipeline through its {name} stage")
        stage_parser.add_argument("--config", required=True)

    stats = sub.add_parser("stats", help="duration statistics over a manifest")
    stats.add_argument("--manifest", required=True)
    stats.add_argument("--bucket-width", type=float, default=1.0)
    stats.add_argument("--json", action="store_true", help="machine-readable output")

    bleu_cmd = sub.add_parser("bleu", help="corpus BLEU between two sentence files")
    bleu_cmd.add_argument("--hyp", required=True, help="hypothesis file, one sentence per line")
    bleu_cmd.add_argument("--ref", required=True, help="reference file, one sentence per line")
    bleu_cmd.add_argument("--smooth-eps", type=float, default=0.0)

    validate = sub.add_parser("validate", help="check a manifest's invariants")
    validate.add_argument("--manifest", required=True)

    ratings = sub.add_parser("aggregate-ratings", help="mean expressivity scores per aspect")
    ratings.add_argument("--ratings", required=True)
    ratings.add_argument("--json", action="store_true")
    return parser


def _print_reports(reports) -> None:
    print(f"{'stage':<24}{'in':>8}{'out':>8}{'drop':>8}{'hits':>6}  {'time':>8}")
    for report in reports:
        print(
            f"{report.stage:<24}{report.input_count:>8}{report.output_count:>8}"
            f"{report.dropped_count:>8}{report.cache_hits:>6}  {report.wall_time_s:>8.2f}"
        )
        for warning in report.warnings:
            print(f"    warning: {warning}")


def _cmd_pipeline(args, stop_after: str | None, export_csv: bool = False) -> int:
    config = load_config(args.config)
    rows, reports = run_pipeline(config, stop_after=stop_after)
    _print_reports(reports)
    if stop_after is None:
        manifest_path = config.output_root / "manifest.jsonl"
        print(f"manifest: {manifest_path} ({len(rows)} rows)")
        if export_csv:
            csv_path = config.output_root / "manifest.csv"
            export_manifest_csv(manifest_path, csv_path)
            print(f"csv export: {csv_path}")
    return EXIT_OK


def _cmd_stats(args) -> int:
    rows = read_manifest(args.manifest)
    if not rows:
        print("manifest has no rows", file=sys.stderr)
        return EXIT_INVALID
    stats = corpus_stats([row.duration_s for row in rows], args.bucket_width)
    if args.json:
        print(
            json.dumps(
                {
                    "count": stats.count,
                    "min_s": stats.min_s,
                    "max_s": stats.max_s,
                    "mean_s": stats.mean_s,
                    "histogram": [list(bucket) for bucket in stats.histogram],
                },
                indent=2,
            )
        )
    else:
        print(render_stats_table(stats))
    return EXIT_OK


def _cmd_bleu(args) -> int:
    with open(args.hyp, encoding="utf-8") as handle:
        hyps = [normalize_text(line) for line in handle if line.strip()]
    with open(args.ref, encoding="utf-8") as handle:
        refs = [normalize_text(line) for line in handle if line.strip()]
    score = bleu(hyps, refs, smooth_eps=args.smooth_eps)
    print(f"{score:.2f}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    violations = validate_manifest(args.manifest)
    if violations:
        for violation in violations:
            print(violation)
        print(f"{len(violations)} violation(s)", file=sys.stderr)
        return EXIT_INVALID
    print("manifest valid")
    return EXIT_OK


def _cmd_ratings(args) -> int:
    sheets = load_rating_sheets(args.ratings)
    summary = aggregate_ratings(sheets)
    if args.json:
        print(json.dumps({"overall": summary.overall, "per_item": summary.per_item}, indent=2))
        return EXIT_OK
    aspects = list(summary.overall)
    header = f"{'item':<16}" + "".join(f"{a:>12}" for a in aspects)
    print(header)
    print(f"{'ALL':<16}" + "".join(f"{summary.overall[a]:>12.2f}" for a in aspects))
    for item, scores in summary.per_item.items():
        print(f"{item:<16}" + "".join(f"{scores[a]:>12.2f}" for a in aspects))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID

    try:
        if args.command == "run-all":
            return _cmd_pipeline(args, stop_after=None, export_csv=args.csv)
        if args.command in STAGE_COMMANDS:
            return _cmd_pipeline(args, stop_after=STAGE_COMMANDS[args.command])
        if args.command == "stats":
            return _cmd_stats(args)
        if args.command == "bleu":
            return _cmd_bleu(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "aggregate-ratings":
            return _cmd_ratings(args)
        parser.error(f"unknown command {args.command}")
        return EXIT_INVALID
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (PipelineError, AdapterError, OSError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
