"""
Command-line interface: `framescope map|compare|vocab|ingest-report`.

Exit status 0 on success, 1 for usage or configuration errors, 2 when a
pipeline module fails. Logging and warnings go to standard error.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from pydantic import ValidationError

from src.corpus import documents_per_year, peak_periods
from src.errors import ConfigError, FramescopeError
from src.export_io import diff_table, write_diff_csv, write_diff_table
from src.models import RunConfig
from src.pipeline import SemanticMapper
from src.textprep import STOPWORDS_ENV, focal_candidates

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PIPELINE = 2

# argparse dest -> RunConfig field; every field has a flag
FLAG_FIELDS = {
    "input_dir": "input_dir",
    "out_dir": "out_dir",
    "stopwords": "stopword_file",
    "date_pattern": "date_pattern",
    "date_format": "date_format",
    "metadata_file": "metadata_file",
    "min_occurrences": "min_occurrences",
    "vocab_cap": "vocab_cap",
    "strict_cutoff": "strict_cutoff",
    "plural_min_length": "plural_min_length",
    "threshold": "threshold_override",
    "similarity": "similarity",
    "binary": "binary_counts",
    "size_log_base": "size_log_base",
    "size_epsilon": "size_epsilon",
    "seed": "seed",
    "layout_l0": "layout_l0",
    "layout_k": "layout_k",
    "layout_epsilon": "layout_epsilon",
    "layout_max_iter": "layout_max_iter",
    "define_window": "windows",
    "focal_words": "focal_words",
}


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit status 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _word_list(value: str) -> list[str]:
    return [w.strip() for w in value.split(",") if w.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON run configuration file.")
    common.add_argument("--input-dir", help="Directory of .txt documents.")
    common.add_argument("--out-dir", help="Directory for written artifacts.")
    common.add_argument("--stopwords", help="Stopword file (one word per line).")
    common.add_argument("--date-pattern", help="Regex whose first group holds the filename date.")
    common.add_argument("--date-format", help="strptime format of the captured date.")
    common.add_argument("--metadata-file", help="Sidecar id,date CSV inside the input directory.")
    common.add_argument("--min-occurrences", type=int, help="Stems must occur more than this many times.")
    common.add_argument("--vocab-cap", type=int, help="Maximum number of vocabulary words (default 100).")
    common.add_argument("--strict-cutoff", action=argparse.BooleanOptionalAction, default=None,
                        help="Require frequency > min_occurrences (--no-strict-cutoff: >=).")
    common.add_argument("--plural-min-length", type=int, help="Shortest token whose plural 's' is removed.")
    common.add_argument("--threshold", type=float, help="Override the derived similarity threshold.")
    common.add_argument("--similarity", choices=["cosine", "pearson"], help="Similarity measure.")
    common.add_argument("--binary", action="store_true", default=None, help="Use presence/absence counts.")
    common.add_argument("--size-log-base", type=float, help="Log base of node sizes (default natural log).")
    common.add_argument("--size-epsilon", type=float, help="Node size given to words of frequency 1.")
    common.add_argument("--seed", type=int, help="Layout seed.")
    common.add_argument("--layout-l0", type=float, help="Length of one graph-distance step.")
    common.add_argument("--layout-k", type=float, help="Spring strength constant.")
    common.add_argument("--layout-epsilon", type=float, help="Stop when the largest gradient norm drops below this.")
    common.add_argument("--layout-max-iter", type=int, help="Node-move budget of the layout.")
    common.add_argument("--define-window", action="append", nargs=3, metavar=("LABEL", "START", "END"),
                        help="Time window with ISO dates (repeatable; replaces the config's windows).")
    common.add_argument("--focal-words", type=_word_list, help="Comma-separated default focal words.")
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr.")

    parser = _Parser(prog="framescope", description="Semantic maps and frame drift from a text corpus.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_map = sub.add_parser("map", parents=[common], help="Build the semantic map of a window.")
    p_map.add_argument("--window", action="append", help="Window label (repeatable; default: every window).")

    p_compare = sub.add_parser("compare", parents=[common], help="Compare two snapshot files.")
    p_compare.add_argument("--before", required=True, help="Snapshot of the earlier window.")
    p_compare.add_argument("--after", required=True, help="Snapshot of the later window.")
    p_compare.add_argument("--focal", help="Comma-separated focal words (default from config).")

    p_vocab = sub.add_parser("vocab", parents=[common], help="Print a window's vocabulary.")
    p_vocab.add_argument("--window", help="Window label.")
    p_vocab.add_argument("--top", type=int, help="Print at most N included and N excluded entries.")
    p_vocab.add_argument("--focal-candidates", type=int, metavar="N",
                         help="Rank stems appearing in the top N of every window.")

    p_ingest = sub.add_parser("ingest-report", parents=[common], help="Summarize the input directory.")
    p_ingest.add_argument("--span-years", type=int, default=3, help="Length of the peak periods (default 3).")
    p_ingest.add_argument("--peaks", type=int, default=3, help="Number of peak periods to list.")
    return parser


def load_config(args: argparse.Namespace, require_min_occurrences: bool = True) -> RunConfig:
    """Config file, then $FRAMESCOPE_STOPWORDS, then command-line flags."""
    data: dict = {}
    if args.config:
        path = Path(args.config)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")

    stopwords = os.getenv(STOPWORDS_ENV)
    if stopwords:
        data["stopword_file"] = stopwords

    for dest, name in FLAG_FIELDS.items():
        value = getattr(args, dest, None)
        if value is None:
            continue
        if name == "windows":
            value = [{"label": label, "start": start, "end": end} for label, start, end in value]
        data[name] = value

    if "min_occurrences" not in data:
        if require_min_occurrences:
            raise ConfigError("min_occurrences is required", "set it in the config file or pass --min-occurrences")
        # only map and vocab apply the cutoff
        data["min_occurrences"] = 0

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "config"
        raise ConfigError(f"invalid configuration: {where}: {first['msg']}") from e


def _cmd_map(args: argparse.Namespace, config: RunConfig) -> int:
    mapper = SemanticMapper(config)
    labels = args.window or [w.label for w in config.windows]
    if not labels:
        raise ConfigError("no window to map", "pass --window or define windows in the config")

    status = EXIT_OK
    for label in labels:
        result = mapper.run_map(label)
        if result.stage == "failed":
            print(f"framescope: [{result.module}] {result.error}", file=sys.stderr)
            failure = EXIT_CONFIG if result.module == "config" else EXIT_PIPELINE
            status = max(status, failure)
            continue

        report = result.report
        rows, cols = report.matrix_shape
        print(
            f"{report.window_label}: {report.document_count} documents, vocabulary {report.vocabulary_size} "
            f"({report.excluded_count} excluded), matrix {rows}x{cols}, "
            f"threshold {report.derived_threshold:.4f} derived / {report.applied_threshold:.4f} applied, "
            f"{report.node_count} nodes, {report.edge_count} edges, {report.isolates_removed} isolates removed, "
            f"{'converged' if report.converged else 'not converged'}"
        )
    return status


def _cmd_compare(args: argparse.Namespace, config: RunConfig) -> int:
    mapper = SemanticMapper(config)
    focal = [w for w in args.focal.split(",") if w.strip()] if args.focal else None
    diff = mapper.compare(args.before, args.after, focal)

    out_dir = Path(config.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"cannot create {out_dir}: {e}") from e
    write_diff_csv(diff, out_dir)
    write_diff_table(diff, out_dir)
    print(diff_table(diff), end="")
    return EXIT_OK


def _cmd_vocab(args: argparse.Namespace, config: RunConfig) -> int:
    if args.top is not None and args.top < 0:
        raise ConfigError("--top must be >= 0")
    if not args.window and args.focal_candidates is None:
        raise ConfigError("vocab needs --window or --focal-candidates")
    mapper = SemanticMapper(config)

    if args.window:
        _, vocab = mapper.vocabulary(args.window)
        rule = ">" if vocab.strict else ">="
        print(
            f"Vocabulary for '{args.window}' (frequency {rule} {vocab.min_occurrences}, cap {vocab.cap}): "
            f"{len(vocab.included)} included, {len(vocab.excluded)} excluded"
        )
        if args.top != 0:
            for title, entries in (("Included", vocab.included), ("Excluded", vocab.excluded)):
                shown = entries if args.top is None else entries[:args.top]
                print(f"\n{title}")
                for entry in shown:
                    print(f"{entry.stem:<24} {entry.window_frequency:>6} {entry.doc_frequency:>6}")

    if args.focal_candidates is not None:
        ranked = focal_candidates(mapper.window_frequency_lists(), top_n=args.focal_candidates)
        print(f"\nFocal-word candidates (top {args.focal_candidates} of each window)")
        for stem, lists, total in ranked:
            print(f"{stem:<24} {lists:>3} {total:>6}")
    return EXIT_OK


def _cmd_ingest_report(args: argparse.Namespace, config: RunConfig) -> int:
    mapper = SemanticMapper(config)
    corpus = mapper.ingest()
    report = mapper.ingest_report

    print(f"Directory: {report.directory}")
    print(f"Files seen: {report.files_seen}, ingested: {report.documents_ingested}, skipped: {len(report.skipped)}")
    for skipped in report.skipped:
        print(f"  skipped {skipped.path}: {skipped.reason}")
    if report.undated:
        print(f"Undated documents: {len(report.undated)}")
    if report.replacement_chars:
        print(f"Undecodable bytes replaced: {report.replacement_chars}")

    print("\nDocuments per year")
    for year, count in documents_per_year(corpus).items():
        print(f"  {year} {count:>5}")
    print(f"\nBusiest {args.span_years}-year periods")
    for start, end, count in peak_periods(corpus, span_years=args.span_years, top=args.peaks):
        print(f"  {start}-{end} {count:>5}")
    if corpus.windows:
        print("\nWindows")
        for window in corpus.windows:
            print(f"  {window.label}: {window.start} to {window.end}, {len(window.document_ids)} documents")
    return EXIT_OK


COMMANDS = {
    "map": _cmd_map,
    "compare": _cmd_compare,
    "vocab": _cmd_vocab,
    "ingest-report": _cmd_ingest_report,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s: %(name)s: %(message)s",
        force=True,
    )

    try:
        config = load_config(args, require_min_occurrences=args.command in ("map", "vocab"))
        return COMMANDS[args.command](args, config)
    except ConfigError as e:
        print(f"framescope: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except FramescopeError as e:
        logger.debug("Command failed", exc_info=True)
        print(f"framescope: {e}", file=sys.stderr)
        return EXIT_PIPELINE
