"""Tests for triad classification, conflict detection and flipping."""

import pytest
from graph_oracles import node_ids, numbered_dataset

from paraphrase_graph.balance_checker import (
    FlipError,
    classify_triad,
    detect_conflicts,
    flip_conflicts,
    is_weakly_balanced,
    triad_census,
)
from paraphrase_graph.schemas import (
    BalanceClass,
    Conflict,
    ConflictReport,
    Label,
    PositivePath,
    Provenance,
    Split,
)
from paraphrase_graph.signed_graph import build_graph, positive_components

P, N = Label.POSITIVE, Label.NEGATIVE


def _check(dataset):
    graph = build_graph(dataset)
    index = positive_components(graph)
    return graph, index, detect_conflicts(graph, index)


@pytest.mark.parametrize(
    "signs, expected",
    [
        ((P, P, P), BalanceClass.BALANCED),
        ((P, N, N), BalanceClass.BALANCED),
        ((N, N, N), BalanceClass.WEAKLY_BALANCED),
        ((P, P, N), BalanceClass.IMBALANCED),
        ((N, P, P), BalanceClass.IMBALANCED),
    ],
)
def test_classify_triad(signs, expected):
    assert classify_triad(signs) is expected


def test_classify_triad_needs_three_signs():
    with pytest.raises(ValueError):
        classify_triad((P, P))


def test_triad_census(conflicted_triangle, negative_triangle):
    assert triad_census(build_graph(conflicted_triangle)) == {
        BalanceClass.BALANCED: 0,
        BalanceClass.WEAKLY_BALANCED: 0,
        BalanceClass.IMBALANCED: 1,
    }
    assert triad_census(build_graph(negative_triangle))[BalanceClass.WEAKLY_BALANCED] == 1


def test_detect_conflict_with_witness(conflicted_triangle):
    ids = node_ids(conflicted_triangle)
    graph, index, report = _check(conflicted_triangle)

    assert report.split is Split.TRAIN
    assert [c.key for c in report.conflicts] == [(ids["A"], ids["C"])]
    assert report.conflicts[0].witness.nodes == (ids["A"], ids["B"], ids["C"])
    assert report.conflicts[0].cluster == index.component_of[ids["A"]]
    assert not is_weakly_balanced(graph, index)


def test_all_negative_triad_is_tolerated(negative_triangle):
    graph, index, report = _check(negative_triangle)
    assert report.conflicts == ()
    assert is_weakly_balanced(graph, index)


def test_cross_cluster_negatives_are_not_conflicts(two_clusters):
    graph, index, report = _check(two_clusters)
    assert report.conflicts == ()
    assert is_weakly_balanced(graph, index)


def test_all_positive_graph_is_weakly_balanced():
    graph, index, _ = _check(numbered_dataset(4, [(0, 1, True), (1, 2, True), (2, 3, True)]))
    assert is_weakly_balanced(graph, index)


def test_witness_is_shortest_positive_path():
    # 0-1-2-3-4 positive chain with shortcut 0-5-4, negative edge 0-4.
    edges = [(0, 1, True), (1, 2, True), (2, 3, True), (3, 4, True), (0, 5, True), (5, 4, True)]
    _, _, report = _check(numbered_dataset(6, edges + [(0, 4, False)]))
    assert report.conflicts[0].witness.nodes == (0, 5, 4)


def test_flip_repairs_triangle(conflicted_triangle):
    ids = node_ids(conflicted_triangle)
    _, _, report = _check(conflicted_triangle)

    repaired, log = flip_conflicts(conflicted_triangle, report)

    assert all(p.label is Label.POSITIVE for p in repaired.pairs)
    flipped = repaired.pair_index[(ids["A"], ids["C"])]
    assert flipped.provenance is Provenance.FLIPPED
    assert [(e.a, e.b, e.old_label, e.new_label) for e in log.flipped] == [
        (ids["A"], ids["C"], Label.NEGATIVE, Label.POSITIVE)
    ]
    assert log.merged == ()
    # The source dataset is left as it was.
    assert conflicted_triangle.pair_index[(ids["A"], ids["C"])].label is Label.NEGATIVE

    graph, index, again = _check(repaired)
    assert again.conflicts == ()
    assert is_weakly_balanced(graph, index)


def test_flip_with_empty_report_is_identity(two_clusters):
    repaired, log = flip_conflicts(two_clusters, ConflictReport(split=Split.TRAIN))
    assert repaired is two_clusters
    assert log.flipped == ()


def test_flip_rejects_report_for_other_dataset(conflicted_triangle, two_clusters):
    _, _, report = _check(conflicted_triangle)
    with pytest.raises(FlipError):
        flip_conflicts(two_clusters, report)


def test_flip_rejects_positive_pair(conflicted_triangle):
    ids = node_ids(conflicted_triangle)
    a, b = ids["A"], ids["B"]
    report = ConflictReport(
        split=Split.TRAIN,
        conflicts=(Conflict(a=a, b=b, witness=PositivePath(nodes=(a, b)), cluster=0),),
    )
    with pytest.raises(FlipError):
        flip_conflicts(conflicted_triangle, report)
