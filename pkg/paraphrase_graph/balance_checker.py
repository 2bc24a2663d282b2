"""Structural-balance checks: triads, intra-cluster conflicts and label flipping."""

import logging
from collections.abc import Sequence

from .schemas import (
    BalanceClass,
    ClusterIndex,
    Conflict,
    ConflictReport,
    FlipEntry,
    FlipLog,
    Label,
    LabeledDataset,
    LabeledPair,
    Provenance,
)
from .signed_graph import ParaphraseGraph, shortest_positive_path

logger = logging.getLogger(__name__)


class FlipError(RuntimeError):
    """Raised when a conflict report does not match the dataset being repaired."""


def classify_triad(signs: Sequence[Label]) -> BalanceClass:
    """Classify a triangle by the product of its edge signs.

    Zero or two negatives balance; three negatives are tolerated as weakly
    balanced; exactly one negative is imbalanced.
    """
    if len(signs) != 3:
        raise ValueError(f"a triad has three edges, got {len(signs)}")
    negatives = sum(1 for s in signs if s is Label.NEGATIVE)
    if negatives == 3:
        return BalanceClass.WEAKLY_BALANCED
    if negatives % 2 == 0:
        return BalanceClass.BALANCED
    return BalanceClass.IMBALANCED


def triad_census(graph: ParaphraseGraph) -> dict[BalanceClass, int]:
    """Count every triangle of the graph by balance class."""
    census = {kind: 0 for kind in BalanceClass}
    neighbors = {node: {nbr for nbr, _ in graph.adjacency(node)} for node in graph.nodes}
    for u, v, sign_uv in graph.edges:
        for w in sorted(neighbors[u] & neighbors[v]):
            if w <= v:
                continue
            census[classify_triad((sign_uv, graph.sign(u, w), graph.sign(v, w)))] += 1
    return census


def detect_conflicts(graph: ParaphraseGraph, index: ClusterIndex) -> ConflictReport:
    """Report every negative edge whose endpoints share a paraphrase cluster.

    Negative edges between different clusters are weak-balance compliant and
    never reported.
    """
    conflicts = []
    for a, b in graph.negative_edges():
        if not index.same_cluster(a, b):
            continue
        witness = shortest_positive_path(graph, a, b, index=index)
        conflicts.append(Conflict(a=a, b=b, witness=witness, cluster=index.component_of[a]))
    logger.info("%s: %d conflicted pairs", graph.split, len(conflicts))
    return ConflictReport(split=graph.split, conflicts=tuple(conflicts))


def is_weakly_balanced(graph: ParaphraseGraph, index: ClusterIndex) -> bool:
    return not any(index.same_cluster(a, b) for a, b in graph.negative_edges())


def flip_conflicts(
    dataset: LabeledDataset, report: ConflictReport
) -> tuple[LabeledDataset, FlipLog]:
    """Turn every conflicted negative pair positive, provenance Flipped.

    A flip keeps the pair's key and a LabeledDataset holds each key once, so a
    flip never lands on another pair: FlipLog.merged stays empty for any valid
    dataset and the pair count is unchanged.
    """
    pairs = dataset.pair_index
    flips: dict[tuple[int, int], LabeledPair] = {}
    entries = []
    for conflict in report.conflicts:
        pair = pairs.get(conflict.key)
        if pair is None:
            raise FlipError(f"conflict {conflict.key} is not a pair of the {dataset.split} dataset")
        if pair.label is not Label.NEGATIVE:
            raise FlipError(f"conflict {conflict.key} is not labeled negative in the dataset")
        flips[pair.key] = pair.model_copy(
            update={"label": Label.POSITIVE, "provenance": Provenance.FLIPPED}
        )
        entries.append(
            FlipEntry(a=pair.a, b=pair.b, old_label=Label.NEGATIVE, new_label=Label.POSITIVE)
        )

    if not flips:
        return dataset, FlipLog(split=dataset.split)

    logger.info("%s: flipped %d pairs", dataset.split, len(entries))
    repaired = LabeledDataset(
        split=dataset.split,
        sentences=dataset.sentences,
        pairs=tuple(flips.get(pair.key, pair) for pair in dataset.pairs),
    )
    return repaired, FlipLog(split=dataset.split, flipped=tuple(entries))
