"""Label inference: transitive positives inside clusters, negatives across linked clusters."""

import logging
from collections.abc import Iterator
from itertools import combinations

from .schemas import (
    AugmentationPolicy,
    AugmentationReport,
    ClusterIndex,
    ConflictHandling,
    InferredPair,
    Label,
    LabeledDataset,
    LabeledPair,
    NegativeBasis,
    PositivePath,
    Provenance,
    TruncationEvent,
)
from .signed_graph import ParaphraseGraph, build_graph, positive_components, shortest_positive_path

logger = logging.getLogger(__name__)


def iter_cluster_blocks(
    graph: ParaphraseGraph, index: ClusterIndex
) -> Iterator[tuple[int, list[tuple[int, int]]]]:
    """Yield (cluster id, unlabeled member pairs) one cluster at a time.

    Pairs inside a block are sorted by (a, b); singleton clusters are skipped.
    """
    for cid, members in index.members.items():
        if len(members) < 2:
            continue
        block = [(a, b) for a, b in combinations(members, 2) if not graph.has_edge(a, b)]
        if block:
            yield cid, block


def witness_for(
    graph: ParaphraseGraph, pair: InferredPair, index: ClusterIndex | None = None
) -> PositivePath | None:
    """Positive path justifying an inferred positive pair, computed on demand."""
    return shortest_positive_path(graph, pair.a, pair.b, index=index)


def _positive(graph, index, a, b, with_witness: bool) -> InferredPair:
    witness = shortest_positive_path(graph, a, b, index=index) if with_witness else None
    return InferredPair(
        a=a, b=b, label=Label.POSITIVE, provenance=Provenance.INFERRED_POSITIVE, witness=witness
    )


def infer_positive_pairs(
    graph: ParaphraseGraph, index: ClusterIndex, with_witnesses: bool = False
) -> list[InferredPair]:
    """Every unlabeled pair inside a paraphrase cluster, labeled positive."""
    inferred = [
        _positive(graph, index, a, b, with_witnesses)
        for _, block in iter_cluster_blocks(graph, index)
        for a, b in block
    ]
    inferred.sort(key=lambda p: p.key)
    return inferred


def linked_clusters(graph: ParaphraseGraph, index: ClusterIndex) -> dict[tuple[int, int], tuple[int, int]]:
    """Map each pair of distinct clusters joined by a negative edge to its smallest such edge."""
    linked: dict[tuple[int, int], tuple[int, int]] = {}
    for a, b in graph.negative_edges():
        cx, cy = index.component_of[a], index.component_of[b]
        if cx == cy:
            continue
        key = (cx, cy) if cx < cy else (cy, cx)
        linked.setdefault(key, (a, b))
    return dict(sorted(linked.items()))


def infer_negative_pairs(graph: ParaphraseGraph, index: ClusterIndex) -> list[InferredPair]:
    """Every unlabeled cross pair of two clusters that share a negative edge."""
    inferred = []
    for (cx, cy), edge in linked_clusters(graph, index).items():
        basis = NegativeBasis(edge=edge, cluster_x=cx, cluster_y=cy)
        for x in index.members[cx]:
            for y in index.members[cy]:
                a, b = (x, y) if x < y else (y, x)
                if graph.has_edge(a, b):
                    continue
                inferred.append(
                    InferredPair(
                        a=a,
                        b=b,
                        label=Label.NEGATIVE,
                        provenance=Provenance.INFERRED_NEGATIVE,
                        negative_basis=basis,
                    )
                )
    inferred.sort(key=lambda p: p.key)
    return inferred


def conflicted_clusters(graph: ParaphraseGraph, index: ClusterIndex) -> dict[int, tuple[int, int]]:
    """Clusters holding an internal negative edge, with the smallest such edge."""
    found: dict[int, tuple[int, int]] = {}
    for a, b in graph.negative_edges():
        cid = index.component_of[a]
        if cid == index.component_of[b]:
            found.setdefault(cid, (a, b))
    return found


def augment_dataset(
    dataset: LabeledDataset, policy: AugmentationPolicy | None = None
) -> tuple[LabeledDataset, AugmentationReport]:
    """Add inferred pairs to a dataset without touching its original labels.

    Inside a cluster that still holds a negative edge, every unlabeled pair is
    reachable both positively and negatively; such pairs are settled by
    ``policy.conflicted_pair_handling`` and counted. Positives per cluster are
    capped by ``policy.max_cluster_pairs``, keeping the smallest (a, b) first.
    """
    policy = policy or AugmentationPolicy()
    graph = build_graph(dataset)
    index = positive_components(graph)
    both_rules = policy.infer_positives and policy.infer_negatives
    contested = conflicted_clusters(graph, index) if both_rules else {}

    added: list[LabeledPair] = []
    truncations: list[TruncationEvent] = []
    n_contested = 0
    n_positive = n_negative = 0

    if policy.infer_positives:
        for cid, block in iter_cluster_blocks(graph, index):
            if cid in contested:
                n_contested += len(block)
                if policy.conflicted_pair_handling is ConflictHandling.DROP:
                    continue
                if policy.conflicted_pair_handling is ConflictHandling.PREFER_NEGATIVE:
                    added.extend(
                        LabeledPair(a=a, b=b, label=Label.NEGATIVE, provenance=Provenance.INFERRED_NEGATIVE)
                        for a, b in block
                    )
                    n_negative += len(block)
                    continue
            cap = policy.max_cluster_pairs
            if cap is not None and len(block) > cap:
                truncations.append(
                    TruncationEvent(
                        cluster=cid,
                        cluster_size=len(index.members[cid]),
                        candidate_pairs=len(block),
                        kept=cap,
                    )
                )
                logger.warning(
                    "cluster %d: %d inferred positives truncated to %d", cid, len(block), cap
                )
                block = block[:cap]
            added.extend(
                LabeledPair(a=a, b=b, label=Label.POSITIVE, provenance=Provenance.INFERRED_POSITIVE)
                for a, b in block
            )
            n_positive += len(block)

    if policy.infer_negatives:
        negatives = infer_negative_pairs(graph, index)
        added.extend(pair.to_labeled_pair() for pair in negatives)
        n_negative += len(negatives)

    if n_contested:
        logger.warning(
            "%s: %d pairs in %d conflicted clusters claimed by both rules (%s)",
            dataset.split,
            n_contested,
            len(contested),
            policy.conflicted_pair_handling,
        )

    augmented = LabeledDataset(
        split=dataset.split, sentences=dataset.sentences, pairs=dataset.pairs + tuple(added)
    )
    by_provenance = {kind: 0 for kind in Provenance}
    for pair in augmented.pairs:
        by_provenance[pair.provenance] += 1
    report = AugmentationReport(
        split=dataset.split,
        policy=policy,
        n_original=len(dataset.pairs),
        n_inferred_positive=n_positive,
        n_inferred_negative=n_negative,
        conflicted_clusters=len(contested),
        conflicted_pairs=n_contested,
        truncations=tuple(truncations),
        n_by_provenance=by_provenance,
    )
    logger.info(
        "%s: %d original pairs, +%d positive, +%d negative",
        dataset.split,
        report.n_original,
        n_positive,
        n_negative,
    )
    return augmented, report
