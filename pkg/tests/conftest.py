"""Shared test fixtures."""

from pathlib import Path

import pytest
from graph_oracles import named_dataset

from paraphrase_graph.schemas import LabeledDataset

QQP_HEADER = "id\tqid1\tqid2\tquestion1\tquestion2\tis_duplicate"


@pytest.fixture
def two_clusters() -> LabeledDataset:
    """A and D paraphrase, D and F paraphrase, C and D do not."""
    return named_dataset([("A", "D", 1), ("D", "F", 1), ("C", "D", 0)])


@pytest.fixture
def conflicted_triangle() -> LabeledDataset:
    return named_dataset([("A", "B", 1), ("B", "C", 1), ("A", "C", 0)])


@pytest.fixture
def negative_triangle() -> LabeledDataset:
    return named_dataset([("A", "B", 0), ("B", "C", 0), ("A", "C", 0)])


@pytest.fixture
def write_qqp(tmp_path: Path):
    """Write (text_a, text_b, label) rows as a QQP-style TSV and return its path."""

    def _write(name: str, rows: list[tuple[str, str, int]]) -> Path:
        lines = [QQP_HEADER]
        lines += [f"{i}\t\t\t{a}\t{b}\t{label}" for i, (a, b, label) in enumerate(rows)]
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write
