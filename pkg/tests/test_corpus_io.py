"""Tests for reading, canonicalizing, writing and counting sentence-pair tables."""

import io

import pytest
from graph_oracles import named_dataset

from paraphrase_graph import corpus_io
from paraphrase_graph.corpus_io import (
    CorpusFormatError,
    CorpusReadError,
    EmptySentenceError,
    canonicalize_sentence,
    compute_stats,
    parse_dataset,
    read_dataset,
    write_dataset,
)
from paraphrase_graph.schemas import FormatConfig, IssueKind, Label, LabeledDataset, Provenance, Split

HEADER = "id\tqid1\tqid2\tquestion1\tquestion2\tis_duplicate\n"


def _parse(body: str, format_config: FormatConfig | None = None):
    return parse_dataset(io.BytesIO(body.encode("utf-8")), format_config or FormatConfig.qqp())


def _triples(dataset: LabeledDataset) -> set[tuple[frozenset[str], Label, Provenance]]:
    texts = dataset.texts
    return {(frozenset((texts[p.a], texts[p.b])), p.label, p.provenance) for p in dataset.pairs}


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("  How  are you? ", "How are you?"),
        ("How are you?", "How are you?"),
        ("tabs\tand\nnewlines", "tabs and newlines"),
    ],
)
def test_canonicalize_collapses_whitespace(raw, expected):
    assert canonicalize_sentence(raw) == expected


def test_canonicalize_preserves_case():
    assert canonicalize_sentence("how are you?") != canonicalize_sentence("How are you?")


@pytest.mark.parametrize("raw", ["", "   ", "\t\n", None])
def test_canonicalize_rejects_empty(raw):
    with pytest.raises(EmptySentenceError):
        canonicalize_sentence(raw)


def test_parse_two_rows_interns_shared_sentence():
    dataset, report = _parse(
        HEADER
        + "0\t1\t2\tHow do I learn piano?\tHow can I learn piano?\t1\n"
        + "1\t1\t3\tHow do I learn piano?\tWhat is a piano?\t0\n"
    )

    assert len(dataset.sentences) == 3
    assert len(dataset.pairs) == 2
    assert all(p.provenance is Provenance.ORIGINAL for p in dataset.pairs)
    assert all(p.a < p.b for p in dataset.pairs)
    stats = compute_stats(dataset)
    assert (stats.n_positive, stats.n_negative) == (1, 1)
    assert report.rows_read == 2
    assert report.pairs_kept == 2
    assert dataset.sentences[0].source_ids == ("1",)


def test_parse_merges_duplicate_pair_in_either_order():
    dataset, report = _parse(
        HEADER + "0\t\t\tfirst question\tsecond question\t1\n" + "1\t\t\tsecond question\tfirst question\t1\n"
    )

    assert len(dataset.pairs) == 1
    assert report.merged_duplicates == 1
    assert dataset.pairs[0].row_ids == ("0", "1")
    assert [i.kind for i in report.issues] == [IssueKind.MERGED_DUPLICATE]


def test_parse_excludes_pair_labeled_both_ways():
    dataset, report = _parse(
        HEADER
        + "0\t\t\tfirst question\tsecond question\t1\n"
        + "1\t\t\tfirst question\tsecond question\t0\n"
        + "2\t\t\tthird question\tfourth question\t0\n"
    )

    assert len(dataset.pairs) == 1
    assert len(report.raw_duplicate_conflicts) == 1
    conflict = report.raw_duplicate_conflicts[0]
    assert conflict.positive_rows == ("0",)
    assert conflict.negative_rows == ("1",)
    # Sentences of the excluded pair are compacted away.
    assert {s.text for s in dataset.sentences} == {"third question", "fourth question"}


def test_parse_skips_bad_rows_and_reports_them():
    dataset, report = _parse(
        HEADER
        + "0\t\t\tgood one\tgood two\t1\n"
        + "1\t\t\tbad label\tsomething\t2\n"
        + "2\t\t\t   \tempty first\t0\n"
        + "3\t\t\tSame  text\tSame text\t0\n"
    )

    assert len(dataset.pairs) == 1
    kinds = [i.kind for i in report.issues]
    assert IssueKind.BAD_LABEL in kinds
    assert IssueKind.EMPTY_SENTENCE in kinds
    assert IssueKind.SELF_PAIR in kinds
    assert report.self_pairs == 1
    self_pair = next(i for i in report.issues if i.kind is IssueKind.SELF_PAIR)
    assert "anomalous" in self_pair.detail


def test_parse_is_independent_of_chunk_size(monkeypatch):
    body = HEADER + "".join(
        f"{i}\t\t\tquestion {i % 4}\tquestion {(i + 1) % 4}\t{i % 2}\n" for i in range(8)
    )
    whole, whole_report = _parse(body)

    monkeypatch.setattr(corpus_io, "PARSE_CHUNK_ROWS", 3)
    chunked, chunked_report = _parse(body)

    assert chunked == whole
    assert chunked_report == whole_report


def test_parse_collects_line_with_extra_fields():
    dataset, report = _parse(
        HEADER + "0\t\t\tgood one\tgood two\t1\n" + "1\t\t\ttoo\tmany\t1\textra\n"
    )

    assert len(dataset.pairs) == 1
    assert any(i.kind is IssueKind.MALFORMED for i in report.issues)
    assert {s.text for s in dataset.sentences} == {"good one", "good two"}


def test_parse_collects_extra_fields_on_first_data_line():
    dataset, report = _parse(HEADER + "1\t\t\ttoo\tmany\t1\textra\n" + "0\t\t\tgood one\tgood two\t1\n")

    assert len(dataset.pairs) == 1
    assert [i.kind for i in report.issues] == [IssueKind.MALFORMED]


def test_parse_headerless_line_with_extra_fields():
    columns = ("id", "qid1", "qid2", "question1", "question2", "is_duplicate")
    config = FormatConfig.qqp(has_header=False, column_names=columns)

    dataset, report = _parse("1\t\t\ttoo\tmany\t1\textra\n" + "0\t\t\tgood one\tgood two\t1\n", config)

    assert len(dataset.pairs) == 1
    assert [i.kind for i in report.issues] == [IssueKind.MALFORMED]


@pytest.mark.parametrize(
    "provenance, label",
    [("flipped", 0), ("inferred_positive", 0), ("inferred_negative", 1)],
)
def test_parse_reports_provenance_contradicting_label(provenance, label):
    dataset, report = _parse(
        "id\tqid1\tqid2\tquestion1\tquestion2\tis_duplicate\tprovenance\n"
        + "0\t1\t2\tgood one\tgood two\t1\toriginal\n"
        + f"1\t3\t4\tbad one\tbad two\t{label}\t{provenance}\n"
    )

    assert [(p.label, p.provenance) for p in dataset.pairs] == [(Label.POSITIVE, Provenance.ORIGINAL)]
    (issue,) = report.issues
    assert issue.kind is IssueKind.MALFORMED
    assert issue.row_number == 2
    assert provenance in issue.detail


def test_parse_is_independent_of_row_order():
    rows = [
        "0\t\t\tfirst question\tsecond question\t1\n",
        "1\t\t\tsecond question\tthird question\t0\n",
        "2\t\t\tthird question\tfourth question\t1\n",
        "3\t\t\tsecond question\tfirst question\t1\n",
        "4\t\t\tfifth question\tfirst question\t0\n",
    ]
    forward, _ = _parse(HEADER + "".join(rows))
    backward, _ = _parse(HEADER + "".join(reversed(rows)))

    assert {s.text for s in backward.sentences} == {s.text for s in forward.sentences}
    assert _triples(backward) == _triples(forward)
    assert len(backward.pairs) == 4


def test_parse_fails_when_no_row_is_usable():
    with pytest.raises(CorpusFormatError):
        _parse(HEADER + "0\t\t\ta\tb\tyes\n" + "1\t\t\tc\td\tno\n")


def test_parse_fails_on_missing_columns():
    with pytest.raises(CorpusFormatError, match="missing required columns"):
        _parse(HEADER + "0\t\t\ta\tb\t1\n", FormatConfig.generic(delimiter="\t"))


def test_parse_empty_stream_yields_empty_dataset():
    dataset, report = _parse("")
    assert dataset.pairs == ()
    assert report.rows_read == 0

    dataset, _ = _parse(HEADER)
    assert dataset.pairs == ()


def test_read_missing_file_is_read_error(tmp_path):
    with pytest.raises(CorpusReadError):
        read_dataset(tmp_path / "missing.tsv", FormatConfig.qqp(), Split.TRAIN)


def test_write_emits_header_and_sorted_rows(two_clusters):
    sink = io.BytesIO()

    assert write_dataset(two_clusters, sink, FormatConfig.qqp()) == 3

    lines = sink.getvalue().decode("utf-8").splitlines()
    assert lines[0] == "id\tqid1\tqid2\tquestion1\tquestion2\tis_duplicate\tprovenance"
    assert lines[1:] == [
        "original-0\t0\t1\tA\tD\t1\toriginal",
        "original-1\t1\t2\tD\tF\t1\toriginal",
        "original-2\t1\t3\tD\tC\t0\toriginal",
    ]


def test_write_empty_dataset_is_header_only():
    sink = io.BytesIO()
    assert write_dataset(LabeledDataset(split=Split.TEST), sink, FormatConfig.qqp()) == 0
    assert sink.getvalue().decode("utf-8").count("\n") == 1


@pytest.mark.parametrize(
    "format_config",
    [
        FormatConfig.qqp(),
        FormatConfig.qqp(has_header=False),
        FormatConfig.qqp(delimiter=","),
        FormatConfig.generic(delimiter=","),
    ],
    ids=["qqp", "qqp-headerless", "qqp-comma", "generic-csv"],
)
def test_write_then_parse_reproduces_pairs(format_config):
    dataset = named_dataset(
        [
            ('Is "X" better, or Y?', "Which is better: X or Y?", 1),
            ("Which is better: X or Y?", "What is X?", 0),
            ("What is X?", "What's X?", 1),
        ]
    )
    flipped = dataset.model_copy(
        update={
            "pairs": (
                dataset.pairs[0],
                dataset.pairs[1],
                dataset.pairs[2].model_copy(update={"provenance": Provenance.FLIPPED}),
            )
        }
    )
    sink = io.BytesIO()
    write_dataset(flipped, sink, format_config)

    parsed, report = parse_dataset(io.BytesIO(sink.getvalue()), format_config)

    assert _triples(parsed) == _triples(flipped)
    assert report.issues == ()


def test_write_keeps_source_row_ids_and_qids():
    dataset, _ = _parse(
        HEADER
        + "7\t101\t202\tfirst q\tsecond q\t1\n"
        + "9\t202\t303\tsecond q\tthird q\t0\n"
        + "12\t\t\tthird q\tfourth q\t1\n"
    )
    sink = io.BytesIO()

    write_dataset(dataset, sink, FormatConfig.qqp())

    lines = sink.getvalue().decode("utf-8").splitlines()
    assert lines[1:] == [
        "7\t101\t202\tfirst q\tsecond q\t1\toriginal",
        "9\t202\t303\tsecond q\tthird q\t0\toriginal",
        "12\t303\t3\tthird q\tfourth q\t1\toriginal",
    ]
    reparsed, _ = parse_dataset(io.BytesIO(sink.getvalue()), FormatConfig.qqp())
    expected_qids = [s.source_ids or (str(s.node_id),) for s in dataset.sentences]
    assert [s.source_ids for s in reparsed.sentences] == expected_qids
    assert [p.row_ids for p in reparsed.pairs] == [p.row_ids for p in dataset.pairs]


def test_stats_ratio_and_provenance_counts(two_clusters):
    stats = compute_stats(two_clusters)
    assert (stats.n_positive, stats.n_negative, stats.total) == (2, 1, 3)
    assert stats.positive_ratio == pytest.approx(66.6666, rel=1e-4)
    assert stats.n_by_provenance[Provenance.ORIGINAL] == 3
    assert stats.n_by_provenance[Provenance.FLIPPED] == 0


def test_stats_of_balanced_pair_is_fifty_percent():
    stats = compute_stats(named_dataset([("a", "b", 1), ("a", "c", 0)]))
    assert stats.positive_ratio == 50.0


def test_stats_of_empty_dataset_has_no_ratio():
    stats = compute_stats(LabeledDataset(split=Split.TRAIN))
    assert stats.total == 0
    assert stats.positive_ratio is None
