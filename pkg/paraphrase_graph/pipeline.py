"""Composition of checking, flipping and augmentation into the four dataset variants."""

import logging
from dataclasses import dataclass

from .balance_checker import detect_conflicts, flip_conflicts, triad_census
from .corpus_io import compute_stats
from .label_inference import augment_dataset
from .schemas import (
    AugmentationPolicy,
    AugmentationReport,
    BalanceClass,
    ClusterIndex,
    ClusterSummary,
    ConflictReport,
    DatasetStats,
    Deviation,
    FlipLog,
    LabeledDataset,
    PipelineSummary,
    Split,
    SplitSummary,
    SummaryRow,
    Variant,
)
from .signed_graph import ParaphraseGraph, build_graph, cluster_summary, positive_components

logger = logging.getLogger(__name__)

# Published paraphrase / non-paraphrase counts for the QQP release.
QQP_REFERENCE_COUNTS: dict[tuple[Variant, Split], tuple[int, int]] = {
    (Variant.ORIGINAL, Split.TRAIN): (134_378, 229_468),
    (Variant.ORIGINAL, Split.TEST): (14_885, 25_545),
    (Variant.ORIGINAL_FLIPPED, Split.TRAIN): (134_446, 229_380),
    (Variant.ORIGINAL_FLIPPED, Split.TEST): (14_886, 25_544),
    (Variant.AUGMENTED, Split.TRAIN): (220_890, 363_986),
    (Variant.AUGMENTED, Split.TEST): (42_570, 28_164),
    (Variant.AUGMENTED_FLIPPED, Split.TRAIN): (220_978, 363_898),
    (Variant.AUGMENTED_FLIPPED, Split.TEST): (42_572, 28_162),
}
QQP_REFERENCE_CONFLICTS = {Split.TRAIN: 88, Split.TEST: 2}


@dataclass(frozen=True)
class CheckResult:
    graph: ParaphraseGraph
    index: ClusterIndex
    report: ConflictReport
    clusters: ClusterSummary
    triads: dict[BalanceClass, int]


@dataclass(frozen=True)
class VariantResult:
    dataset: LabeledDataset
    stats: DatasetStats
    flip_log: FlipLog | None = None
    augmentation: AugmentationReport | None = None


def check_dataset(dataset: LabeledDataset) -> CheckResult:
    graph = build_graph(dataset)
    index = positive_components(graph)
    return CheckResult(
        graph=graph,
        index=index,
        report=detect_conflicts(graph, index),
        clusters=cluster_summary(index),
        triads=triad_census(graph),
    )


def flipped_variant(dataset: LabeledDataset, check: CheckResult | None = None) -> VariantResult:
    check = check or check_dataset(dataset)
    repaired, log = flip_conflicts(dataset, check.report)
    return VariantResult(dataset=repaired, stats=compute_stats(repaired), flip_log=log)


def augmented_variant(
    dataset: LabeledDataset,
    policy: AugmentationPolicy,
    flip: bool,
    flip_before_infer: bool = True,
    check: CheckResult | None = None,
) -> VariantResult:
    """Augmented (flip off) or Augmented-flipped (flip on) dataset for one split.

    With flip_before_infer the conflicts are repaired first and inference runs
    on a weakly balanced graph; otherwise the unflipped data is augmented and
    the originally conflicted pairs are flipped afterwards.
    """
    if not flip:
        augmented, report = augment_dataset(dataset, policy)
        return VariantResult(dataset=augmented, stats=compute_stats(augmented), augmentation=report)

    check = check or check_dataset(dataset)
    if flip_before_infer:
        repaired, log = flip_conflicts(dataset, check.report)
        augmented, report = augment_dataset(repaired, policy)
    else:
        unflipped, report = augment_dataset(dataset, policy)
        augmented, log = flip_conflicts(unflipped, check.report)
    return VariantResult(
        dataset=augmented, stats=compute_stats(augmented), flip_log=log, augmentation=report
    )


def build_variants(
    dataset: LabeledDataset,
    policy: AugmentationPolicy,
    flip_before_infer: bool = True,
    check: CheckResult | None = None,
) -> dict[Variant, VariantResult]:
    """All four variants of one split, sharing one conflict check."""
    check = check or check_dataset(dataset)
    return {
        Variant.ORIGINAL: VariantResult(dataset=dataset, stats=compute_stats(dataset)),
        Variant.ORIGINAL_FLIPPED: flipped_variant(dataset, check),
        Variant.AUGMENTED: augmented_variant(dataset, policy, flip=False, check=check),
        Variant.AUGMENTED_FLIPPED: augmented_variant(
            dataset, policy, flip=True, flip_before_infer=flip_before_infer, check=check
        ),
    }


def split_summary(
    split: Split, check: CheckResult, variants: dict[Variant, VariantResult]
) -> SplitSummary:
    original = variants[Variant.ORIGINAL].stats.total
    augmented = variants[Variant.AUGMENTED]
    flip_log = variants[Variant.ORIGINAL_FLIPPED].flip_log
    return SplitSummary(
        split=split,
        conflicts=len(check.report.conflicts),
        flips=len(flip_log.flipped) if flip_log else 0,
        merged_on_flip=len(flip_log.merged) if flip_log else 0,
        inferred_positive=augmented.augmentation.n_inferred_positive,
        inferred_negative=augmented.augmentation.n_inferred_negative,
        expansion_pct=100.0 * (augmented.stats.total - original) / original if original else None,
    )


def compare_with_reference(
    rows: list[SummaryRow], splits: list[SplitSummary]
) -> list[Deviation]:
    """Itemize every count that differs from the published QQP numbers."""
    deviations = []
    for row in rows:
        for split, stats in row.stats.items():
            expected = QQP_REFERENCE_COUNTS.get((row.variant, split))
            if expected is None:
                continue
            for name, want, got in (
                ("paraphrase", expected[0], stats.n_positive),
                ("non_paraphrase", expected[1], stats.n_negative),
            ):
                if want != got:
                    deviations.append(
                        Deviation(metric=f"{row.variant}.{split}.{name}", expected=want, actual=got)
                    )
    for summary in splits:
        want = QQP_REFERENCE_CONFLICTS[summary.split]
        if want != summary.conflicts:
            deviations.append(
                Deviation(metric=f"conflicts.{summary.split}", expected=want, actual=summary.conflicts)
            )
    for deviation in deviations:
        logger.warning(
            "deviation from reference: %s expected %d, got %d",
            deviation.metric,
            deviation.expected,
            deviation.actual,
        )
    return deviations


def summarize(
    checks: dict[Split, CheckResult],
    variants: dict[Split, dict[Variant, VariantResult]],
    reference: str | None = None,
) -> PipelineSummary:
    rows = [
        SummaryRow(
            variant=variant,
            stats={split: per_split[variant].stats for split, per_split in variants.items()},
        )
        for variant in Variant
    ]
    splits = [split_summary(split, checks[split], variants[split]) for split in variants]
    deviations = compare_with_reference(rows, splits) if reference == "qqp" else []
    return PipelineSummary(rows=tuple(rows), splits=tuple(splits), deviations=tuple(deviations))
