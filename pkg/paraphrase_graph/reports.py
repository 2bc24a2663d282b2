"""Text and structured renderings of parse, conflict, flip, augmentation and summary reports."""

import csv
from typing import TextIO

from pydantic import BaseModel, ConfigDict

from .schemas import (
    AugmentationReport,
    BalanceClass,
    ClusterSummary,
    ConflictRecord,
    ConflictReport,
    DatasetStats,
    FlipLog,
    LabeledDataset,
    ParseReport,
    PipelineSummary,
    ReportFormat,
    Split,
)


class ConflictListing(BaseModel):
    """Serialized conflict report with sentence texts."""

    model_config = ConfigDict(extra="forbid")

    split: Split
    conflicts: list[ConflictRecord]
    clusters: ClusterSummary | None = None
    triads: dict[BalanceClass, int] | None = None


def _json(model: BaseModel) -> str:
    return model.model_dump_json(indent=2) + "\n"


def _ratio(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.2f}"


def conflict_records(report: ConflictReport, dataset: LabeledDataset) -> list[ConflictRecord]:
    texts = dataset.texts
    return [
        ConflictRecord(
            a=c.a,
            b=c.b,
            sentence_a=texts[c.a],
            sentence_b=texts[c.b],
            cluster=c.cluster,
            witness=[texts[node] for node in c.witness.nodes],
        )
        for c in report.conflicts
    ]


def render_parse_report(report: ParseReport, fmt: ReportFormat) -> str:
    if fmt is ReportFormat.STRUCTURED:
        return _json(report)
    lines = [
        f"source\t{report.source or '-'}",
        f"split\t{report.split}",
        f"rows_read\t{report.rows_read}",
        f"rows_kept\t{report.rows_kept}",
        f"pairs_kept\t{report.pairs_kept}",
        f"merged_duplicates\t{report.merged_duplicates}",
        f"self_pairs\t{report.self_pairs}",
        f"raw_duplicate_conflicts\t{len(report.raw_duplicate_conflicts)}",
    ]
    for issue in report.issues:
        row = "-" if issue.row_number is None else str(issue.row_number)
        lines.append(f"issue\t{row}\t{issue.kind}\t{issue.detail}")
    for conflict in report.raw_duplicate_conflicts:
        lines.append(
            f"raw_conflict\t{conflict.text_a}\t{conflict.text_b}"
            f"\t+{','.join(conflict.positive_rows)}\t-{','.join(conflict.negative_rows)}"
        )
    return "\n".join(lines) + "\n"


def render_stats(stats: DatasetStats, fmt: ReportFormat) -> str:
    if fmt is ReportFormat.STRUCTURED:
        return _json(stats)
    lines = [
        "split\tparaphrase\tnon_paraphrase\ttotal\tparaphrase_ratio",
        f"{stats.split}\t{stats.n_positive}\t{stats.n_negative}\t{stats.total}\t{_ratio(stats.positive_ratio)}",
    ]
    lines += [f"provenance\t{kind}\t{count}" for kind, count in stats.n_by_provenance.items()]
    return "\n".join(lines) + "\n"


def render_conflicts(
    report: ConflictReport,
    dataset: LabeledDataset,
    fmt: ReportFormat,
    clusters: ClusterSummary | None = None,
    triads: dict[BalanceClass, int] | None = None,
) -> str:
    records = conflict_records(report, dataset)
    if fmt is ReportFormat.STRUCTURED:
        return _json(
            ConflictListing(split=report.split, conflicts=records, clusters=clusters, triads=triads)
        )
    lines = [f"split\t{report.split}", f"conflicts\t{len(records)}"]
    if clusters is not None:
        lines.append(
            f"clusters\t{clusters.n_clusters}\tnon_singleton\t{clusters.n_non_singleton}"
            f"\tlargest\t{clusters.largest}"
        )
    if triads is not None:
        lines += [f"triads\t{kind}\t{count}" for kind, count in triads.items()]
    for number, record in enumerate(records, start=1):
        lines.append(f"[{number}] cluster {record.cluster}: ({record.a}, {record.b})")
        lines.append(f"  - {record.sentence_a}")
        lines.append(f"  - {record.sentence_b}")
        lines.append("  witness:")
        lines += [f"    {text}" for text in record.witness]
    return "\n".join(lines) + "\n"


def write_conflicted_pairs(report: ConflictReport, dataset: LabeledDataset, sink: TextIO) -> int:
    """Semicolon-separated question1;question2 listing of conflicted pairs."""
    writer = csv.writer(sink, delimiter=";", lineterminator="\n")
    writer.writerow(["question1", "question2"])
    texts = dataset.texts
    for conflict in report.conflicts:
        writer.writerow([texts[conflict.a], texts[conflict.b]])
    return len(report.conflicts)


def render_flip_log(log: FlipLog, dataset: LabeledDataset, fmt: ReportFormat) -> str:
    if fmt is ReportFormat.STRUCTURED:
        return _json(log)
    texts = dataset.texts
    lines = [f"split\t{log.split}", f"flipped\t{len(log.flipped)}", f"merged\t{len(log.merged)}"]
    for entry in log.flipped:
        lines.append(
            f"flip\t{entry.a}\t{entry.b}\t{entry.old_label}->{entry.new_label}"
            f"\t{texts[entry.a]}\t{texts[entry.b]}"
        )
    for pair in log.merged:
        lines.append(f"merge\t{pair.a}\t{pair.b}\t{','.join(pair.row_ids)}")
    return "\n".join(lines) + "\n"


def render_augmentation_report(report: AugmentationReport, fmt: ReportFormat) -> str:
    if fmt is ReportFormat.STRUCTURED:
        return _json(report)
    policy = report.policy
    lines = [
        f"split\t{report.split}",
        f"policy\tpositives={policy.infer_positives}\tnegatives={policy.infer_negatives}"
        f"\tconflicted={policy.conflicted_pair_handling}\tmax_cluster_pairs={policy.max_cluster_pairs}",
        f"original\t{report.n_original}",
        f"inferred_positive\t{report.n_inferred_positive}",
        f"inferred_negative\t{report.n_inferred_negative}",
        f"conflicted_clusters\t{report.conflicted_clusters}",
        f"conflicted_pairs\t{report.conflicted_pairs}",
    ]
    lines += [f"provenance\t{kind}\t{count}" for kind, count in report.n_by_provenance.items()]
    for event in report.truncations:
        lines.append(
            f"truncated\tcluster={event.cluster}\tsize={event.cluster_size}"
            f"\tcandidates={event.candidate_pairs}\tkept={event.kept}"
        )
    return "\n".join(lines) + "\n"


def render_summary(summary: PipelineSummary, fmt: ReportFormat) -> str:
    """Dataset table: paraphrase / non-paraphrase counts per split and ratios."""
    if fmt is ReportFormat.STRUCTURED:
        return _json(summary)
    header = (
        "dataset\ttrain_paraphrase\ttrain_non_paraphrase\ttest_paraphrase"
        "\ttest_non_paraphrase\ttrain_ratio\ttest_ratio"
    )
    lines = [header]
    for row in summary.rows:
        train, test = row.stats.get(Split.TRAIN), row.stats.get(Split.TEST)
        cells = [row.variant.value]
        for stats in (train, test):
            cells += ["-", "-"] if stats is None else [str(stats.n_positive), str(stats.n_negative)]
        for stats in (train, test):
            cells.append("-" if stats is None else _ratio(stats.positive_ratio))
        lines.append("\t".join(cells))
    if summary.splits:
        lines.append("")
        lines.append("split\tconflicts\tflips\tmerged\tinferred_positive\tinferred_negative\texpansion_pct")
    for split in summary.splits:
        lines.append(
            f"{split.split}\t{split.conflicts}\t{split.flips}\t{split.merged_on_flip}"
            f"\t{split.inferred_positive}\t{split.inferred_negative}\t{_ratio(split.expansion_pct)}"
        )
    if summary.deviations:
        lines.append("")
        lines.append("deviation\texpected\tactual")
        lines += [f"{d.metric}\t{d.expected}\t{d.actual}" for d in summary.deviations]
    return "\n".join(lines) + "\n"
