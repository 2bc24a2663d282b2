"""Command-line entry point: stats, check, flip, augment and pipeline subcommands."""

import argparse
import logging
import os
import sys
from collections.abc import Callable
from enum import IntEnum
from pathlib import Path

from dotenv import load_dotenv
from pydantic import ValidationError

from . import reports
from .corpus_io import (
    CorpusFormatError,
    CorpusReadError,
    CorpusWriteError,
    compute_stats,
    read_dataset,
    write_dataset_file,
)
from .pipeline import (
    CheckResult,
    VariantResult,
    augmented_variant,
    build_variants,
    check_dataset,
    flipped_variant,
    summarize,
)
from .schemas import (
    AugmentationPolicy,
    ConflictHandling,
    FormatConfig,
    LabeledDataset,
    ParseReport,
    PipelineConfig,
    PipelineSummary,
    ReportFormat,
    Split,
    SummaryRow,
    Variant,
)
from .signed_graph import write_edge_list

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class ExitCode(IntEnum):
    """Process exit statuses."""

    OK = 0
    CONFLICTS_FOUND = 1
    USAGE = 2
    PARSE_FAILURE = 3
    IO_FAILURE = 4


def _suffix(fmt: ReportFormat) -> str:
    return "json" if fmt is ReportFormat.STRUCTURED else "txt"


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8", newline="\n")
    except OSError as exc:
        raise CorpusWriteError(f"cannot write {path}: {exc}") from exc


class OutputTree:
    """Paths and writers for one run's output directory."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.fmt = config.report_format

    def path(self, variant: Variant, name: str) -> Path:
        return self.config.out_dir / variant.value / name

    def report(self, variant: Variant, split: Split, kind: str, text: str) -> None:
        _write_text(self.path(variant, f"{split}.{kind}.{_suffix(self.fmt)}"), text)

    def parse_report(self, report: ParseReport) -> None:
        self.report(Variant.ORIGINAL, report.split, "parse_report", reports.render_parse_report(report, self.fmt))

    def variant(self, variant: Variant, split: Split, result: VariantResult) -> None:
        write_dataset_file(result.dataset, self.path(variant, f"{split}.tsv"), self.config.format)
        self.report(variant, split, "stats", reports.render_stats(result.stats, self.fmt))
        if result.flip_log is not None:
            self.report(
                variant, split, "flip_log", reports.render_flip_log(result.flip_log, result.dataset, self.fmt)
            )
        if result.augmentation is not None:
            self.report(
                variant,
                split,
                "augmentation",
                reports.render_augmentation_report(result.augmentation, self.fmt),
            )

    def check(self, split: Split, dataset: LabeledDataset, check: CheckResult) -> None:
        text = reports.render_conflicts(check.report, dataset, self.fmt, check.clusters, check.triads)
        self.report(Variant.ORIGINAL, split, "conflicts", text)
        path = self.path(Variant.ORIGINAL, f"{split}.conflicted_pairs.csv")
        try:
            with path.open("w", encoding="utf-8", newline="") as sink:
                reports.write_conflicted_pairs(check.report, dataset, sink)
        except OSError as exc:
            raise CorpusWriteError(f"cannot write {path}: {exc}") from exc
        if self.config.export_graph:
            path = self.path(Variant.ORIGINAL, f"{split}.edges.tsv")
            with path.open("w", encoding="utf-8", newline="\n") as sink:
                write_edge_list(check.graph, sink)


def _load(config: PipelineConfig, out: OutputTree) -> dict[Split, LabeledDataset]:
    datasets = {}
    for split, path in config.inputs():
        dataset, report = read_dataset(path, config.format, split)
        out.parse_report(report)
        datasets[split] = dataset
    return datasets


def cmd_stats(config: PipelineConfig) -> int:
    out = OutputTree(config)
    stats = {}
    for split, dataset in _load(config, out).items():
        stats[split] = compute_stats(dataset)
        if not stats[split].total:
            logger.warning("%s split is empty", split)
        out.report(Variant.ORIGINAL, split, "stats", reports.render_stats(stats[split], out.fmt))
    summary = PipelineSummary(rows=(SummaryRow(variant=Variant.ORIGINAL, stats=stats),), splits=())
    print(reports.render_summary(summary, ReportFormat.TEXT), end="")
    return ExitCode.OK


def cmd_check(config: PipelineConfig) -> int:
    out = OutputTree(config)
    found = 0
    for split, dataset in _load(config, out).items():
        check = check_dataset(dataset)
        out.check(split, dataset, check)
        found += len(check.report.conflicts)
        print(f"{split}\tconflicts\t{len(check.report.conflicts)}")
    return ExitCode.CONFLICTS_FOUND if found else ExitCode.OK


def cmd_flip(config: PipelineConfig) -> int:
    out = OutputTree(config)
    for split, dataset in _load(config, out).items():
        result = flipped_variant(dataset)
        out.variant(Variant.ORIGINAL_FLIPPED, split, result)
        print(f"{split}\tflipped\t{len(result.flip_log.flipped)}")
    return ExitCode.OK


def cmd_augment(config: PipelineConfig) -> int:
    out = OutputTree(config)
    variant = Variant.AUGMENTED_FLIPPED if config.flip else Variant.AUGMENTED
    for split, dataset in _load(config, out).items():
        result = augmented_variant(
            dataset, config.policy, flip=config.flip, flip_before_infer=config.flip_before_infer
        )
        out.variant(variant, split, result)
        print(
            f"{split}\t{variant}\tparaphrase\t{result.stats.n_positive}"
            f"\tnon_paraphrase\t{result.stats.n_negative}"
        )
    return ExitCode.OK


def cmd_pipeline(config: PipelineConfig) -> int:
    out = OutputTree(config)
    checks, variants = {}, {}
    for split, dataset in _load(config, out).items():
        checks[split] = check_dataset(dataset)
        out.check(split, dataset, checks[split])
        variants[split] = build_variants(
            dataset, config.policy, flip_before_infer=config.flip_before_infer, check=checks[split]
        )
        for variant, result in variants[split].items():
            out.variant(variant, split, result)
    summary = summarize(checks, variants, reference=config.reference)
    _write_text(config.out_dir / f"summary.{_suffix(out.fmt)}", reports.render_summary(summary, out.fmt))
    print(reports.render_summary(summary, ReportFormat.TEXT), end="")
    return ExitCode.OK


COMMANDS: dict[str, Callable[[PipelineConfig], int]] = {
    "stats": cmd_stats,
    "check": cmd_check,
    "flip": cmd_flip,
    "augment": cmd_augment,
    "pipeline": cmd_pipeline,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input-train", type=Path, help="training split table")
    common.add_argument("--input-test", type=Path, help="testing split table")
    common.add_argument("--out-dir", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--format", choices=["qqp", "generic"], default="qqp", help="column layout preset")
    common.add_argument("--delimiter", help="field delimiter (default: tab)")
    common.add_argument("--no-header", action="store_true", help="input has no header row")
    common.add_argument(
        "--flip",
        action=argparse.BooleanOptionalAction,
        default=False,
        help="repair conflicted pairs before writing augmented data",
    )
    common.add_argument(
        "--flip-before-infer",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="flip conflicts before inference (default) or after it",
    )
    common.add_argument(
        "--conflict-policy",
        choices=[h.value for h in ConflictHandling],
        default=ConflictHandling.DROP.value,
        help="handling of pairs claimed by both inference rules",
    )
    common.add_argument("--max-cluster-pairs", type=int, help="cap on inferred positives per cluster")
    common.add_argument(
        "--report-format",
        choices=[f.value for f in ReportFormat],
        default=ReportFormat.TEXT.value,
    )
    common.add_argument("--export-graph", action="store_true", help="also write signed edge lists")
    common.add_argument("--reference", choices=["qqp"], help="itemize deviations from published counts")

    parser = argparse.ArgumentParser(
        prog="paraphrase-graph",
        description="Augment and repair sentence-pair datasets through their signed paraphrase graph.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("stats", "paraphrase / non-paraphrase counts per split"),
        ("check", "report negative pairs inside paraphrase clusters"),
        ("flip", "write datasets with conflicted pairs flipped to paraphrase"),
        ("augment", "write datasets extended with inferred pairs"),
        ("pipeline", "write all four dataset variants and their reports"),
    ):
        subparsers.add_parser(name, parents=[common], help=help_text)
    return parser


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    preset = FormatConfig.qqp if args.format == "qqp" else FormatConfig.generic
    overrides: dict = {}
    if args.delimiter:
        overrides["delimiter"] = args.delimiter.encode().decode("unicode_escape")
    if args.no_header:
        overrides["has_header"] = False
    return PipelineConfig(
        input_train=args.input_train,
        input_test=args.input_test,
        out_dir=args.out_dir,
        format=preset(**overrides),
        policy=AugmentationPolicy(
            conflicted_pair_handling=ConflictHandling(args.conflict_policy),
            max_cluster_pairs=args.max_cluster_pairs,
        ),
        flip=args.flip,
        flip_before_infer=args.flip_before_infer,
        report_format=ReportFormat(args.report_format),
        export_graph=args.export_graph,
        reference=args.reference,
    )


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    logging.basicConfig(
        level=os.getenv("PARAPHRASE_GRAPH_LOG_LEVEL", "INFO").upper(),
        format=LOG_FORMAT,
        stream=sys.stderr,
    )
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
    except ValidationError as exc:
        print(f"error: invalid configuration\n{exc}", file=sys.stderr)
        return ExitCode.USAGE

    try:
        return COMMANDS[args.command](config)
    except CorpusFormatError as exc:
        logger.error("parse failure: %s", exc)
        return ExitCode.PARSE_FAILURE
    except (CorpusReadError, CorpusWriteError, OSError) as exc:
        logger.error("I/O failure: %s", exc)
        return ExitCode.IO_FAILURE


if __name__ == "__main__":
    sys.exit(main())
