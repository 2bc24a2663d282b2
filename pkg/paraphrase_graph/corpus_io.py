"""Parse, canonicalize, deduplicate, write and summarize sentence-pair tables."""

import csv
import io
import logging
import os
import re
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from itertools import repeat
from pathlib import Path
from typing import BinaryIO

import pandas as pd

from .schemas import (
    DatasetStats,
    FormatConfig,
    IssueKind,
    Label,
    LabeledDataset,
    LabeledPair,
    ParseReport,
    Provenance,
    RawDuplicateConflict,
    RowIssue,
    Sentence,
    Split,
)

logger = logging.getLogger(__name__)

PARSE_CHUNK_ROWS = int(os.getenv("PARSE_CHUNK_ROWS", "50000"))

_WHITESPACE_RUN = re.compile(r"\s+")
_LABELS = {"1": Label.POSITIVE, "0": Label.NEGATIVE}
_QUOTING = {"minimal": csv.QUOTE_MINIMAL, "none": csv.QUOTE_NONE}
_OVERFLOW_PREFIX = "__overflow_"


class CorpusReadError(RuntimeError):
    """Raised when an input stream cannot be read or decoded."""


class CorpusFormatError(RuntimeError):
    """Raised when an input table is structurally unusable."""


class CorpusWriteError(RuntimeError):
    """Raised when a dataset cannot be written to its sink."""


class EmptySentenceError(ValueError):
    """Raised when a sentence is empty after canonicalization."""


@dataclass(frozen=True, slots=True)
class RawRow:
    """One input row before validation. Missing cells are None; overflow marks
    values past the named columns."""

    text_a: object
    text_b: object
    label: object
    id_a: object = None
    id_b: object = None
    row_id: object = None
    provenance: object = None
    overflow: bool = False


def canonicalize_sentence(raw: object) -> str:
    """Trim and collapse whitespace runs; case and punctuation are kept."""
    if not isinstance(raw, str):
        raise EmptySentenceError("missing sentence text")
    text = _WHITESPACE_RUN.sub(" ", raw).strip()
    if not text:
        raise EmptySentenceError("sentence is empty after canonicalization")
    return text


def _cell(value: object) -> str | None:
    if value is None or (not isinstance(value, str) and pd.isna(value)):
        return None
    text = str(value).strip()
    return text or None


@dataclass
class _PendingPair:
    labels: dict[Label, list[str]] = field(default_factory=dict)
    provenance: Provenance = Provenance.ORIGINAL


class DatasetBuilder:
    """Accumulates raw rows into an interned, deduplicated LabeledDataset.

    Sentences are interned by canonical text in first-seen order. A pair seen
    twice with the same label is merged; a pair seen with both labels is
    excluded and reported as a raw duplicate conflict.
    """

    def __init__(self, split: Split, source: str | None = None):
        self.split = split
        self.source = source
        self._node_of: dict[str, int] = {}
        self._source_ids: dict[int, set[str]] = {}
        self._pending: dict[tuple[int, int], _PendingPair] = {}
        self._issues: list[RowIssue] = []
        self._rows_read = 0
        self._rows_kept = 0
        self._structurally_valid = 0
        self._merged = 0
        self._self_pairs = 0

    def _intern(self, text: str, source_id: str | None) -> int:
        node = self._node_of.get(text)
        if node is None:
            node = len(self._node_of)
            self._node_of[text] = node
            self._source_ids[node] = set()
        if source_id is not None:
            self._source_ids[node].add(source_id)
        return node

    def _issue(self, row_number: int | None, kind: IssueKind, detail: str) -> None:
        self._issues.append(RowIssue(row_number=row_number, kind=kind, detail=detail))

    def add_rejected_line(self, fields: list[str]) -> None:
        """Record a line the tokenizer could not split into the expected columns."""
        self._rows_read += 1
        self._issue(None, IssueKind.MALFORMED, f"unexpected field count {len(fields)}")

    def add_row(self, row: RawRow) -> None:
        self._rows_read += 1
        number = self._rows_read
        row_id = _cell(row.row_id) or f"row-{number}"

        if row.overflow:
            self._issue(number, IssueKind.MALFORMED, "more fields than named columns")
            return

        label = _LABELS.get(_cell(row.label) or "")
        if _cell(row.label) is None:
            self._issue(number, IssueKind.MALFORMED, "missing label column")
            return
        if label is None:
            self._issue(number, IssueKind.BAD_LABEL, f"non-binary label {row.label!r}")
            return

        provenance = Provenance.ORIGINAL
        raw_provenance = _cell(row.provenance)
        if raw_provenance is not None:
            try:
                provenance = Provenance(raw_provenance)
            except ValueError:
                self._issue(number, IssueKind.MALFORMED, f"unknown provenance {raw_provenance!r}")
                return
        implied = provenance.implied_label
        if implied is not None and label is not implied:
            detail = f"{provenance} row labeled {label.as_int}, expected {implied.as_int}"
            self._issue(number, IssueKind.MALFORMED, detail)
            return
        self._structurally_valid += 1

        try:
            text_a = canonicalize_sentence(row.text_a)
            text_b = canonicalize_sentence(row.text_b)
        except EmptySentenceError as exc:
            self._issue(number, IssueKind.EMPTY_SENTENCE, str(exc))
            return

        if text_a == text_b:
            self._self_pairs += 1
            detail = "self-pair dropped"
            if label is Label.NEGATIVE:
                detail = "self-pair labeled non-paraphrase (anomalous), dropped"
            self._issue(number, IssueKind.SELF_PAIR, detail)
            return

        a = self._intern(text_a, _cell(row.id_a))
        b = self._intern(text_b, _cell(row.id_b))
        key = (a, b) if a < b else (b, a)
        pending = self._pending.get(key)
        if pending is None:
            pending = self._pending[key] = _PendingPair(provenance=provenance)
        elif label in pending.labels:
            self._merged += 1
            self._issue(number, IssueKind.MERGED_DUPLICATE, f"duplicate of {pending.labels[label][0]}")
        pending.labels.setdefault(label, []).append(row_id)
        self._rows_kept += 1

    def finish(self) -> tuple[LabeledDataset, ParseReport]:
        kept: list[tuple[tuple[int, int], Label, _PendingPair]] = []
        conflicts: list[RawDuplicateConflict] = []
        text_of = {node: text for text, node in self._node_of.items()}
        for key, pending in self._pending.items():
            if len(pending.labels) > 1:
                conflicts.append(
                    RawDuplicateConflict(
                        text_a=text_of[key[0]],
                        text_b=text_of[key[1]],
                        positive_rows=tuple(pending.labels[Label.POSITIVE]),
                        negative_rows=tuple(pending.labels[Label.NEGATIVE]),
                    )
                )
                self._issue(None, IssueKind.RAW_DUPLICATE_CONFLICT, f"{key} labeled both ways; excluded")
                continue
            (label,) = pending.labels
            kept.append((key, label, pending))

        # Compact away sentences no surviving pair references; first-seen order is kept.
        referenced = sorted({node for key, _, _ in kept for node in key})
        new_id = {old: new for new, old in enumerate(referenced)}
        sentences = tuple(
            Sentence(node_id=new_id[old], text=text_of[old], source_ids=tuple(self._source_ids[old]))
            for old in referenced
        )
        pairs = []
        for (a, b), label, pending in kept:
            x, y = sorted((new_id[a], new_id[b]))
            pairs.append(
                LabeledPair(
                    a=x,
                    b=y,
                    label=label,
                    provenance=pending.provenance,
                    row_ids=tuple(pending.labels[label]),
                )
            )

        if self._rows_read and not self._structurally_valid:
            raise CorpusFormatError(
                f"none of the {self._rows_read} data rows in {self.source or 'input'} could be parsed"
            )
        if conflicts:
            logger.warning(
                "%s: %d pairs labeled both ways were excluded", self.source or self.split, len(conflicts)
            )

        dataset = LabeledDataset(split=self.split, sentences=sentences, pairs=tuple(pairs))
        report = ParseReport(
            source=self.source,
            split=self.split,
            rows_read=self._rows_read,
            rows_kept=self._rows_kept,
            pairs_kept=len(pairs),
            merged_duplicates=self._merged,
            self_pairs=self._self_pairs,
            issues=tuple(self._issues),
            raw_duplicate_conflicts=tuple(conflicts),
        )
        return dataset, report


def _column_labels(names: list[str], width: int) -> list[str]:
    labels = names[:width]
    return labels + [f"{_OVERFLOW_PREFIX}{i}" for i in range(width - len(labels))]


def _iter_chunks(
    source: BinaryIO, format_config: FormatConfig, on_bad_line
) -> Iterator[pd.DataFrame]:
    """Yield chunks with named columns.

    The first line fixes the field count, so pandas hands every longer line to
    on_bad_line. With a header, that first line also supplies the names.
    """
    reader = pd.read_csv(
        source,
        sep=format_config.delimiter,
        header=None,
        dtype=str,
        keep_default_na=False,
        quoting=_QUOTING[format_config.effective_quoting],
        encoding=format_config.encoding,
        engine="python",
        on_bad_lines=on_bad_line,
        chunksize=PARSE_CHUNK_ROWS,
    )
    names = format_config.input_names
    with reader:
        for chunk in reader:
            if names is None:
                names = [str(value).strip() for value in chunk.iloc[0]]
                if len(set(names)) != len(names):
                    raise CorpusFormatError(f"duplicate column names in header: {names}")
                chunk = chunk.iloc[1:]
            yield chunk.set_axis(_column_labels(names, chunk.shape[1]), axis=1)


def _rows_of(chunk: pd.DataFrame, format_config: FormatConfig) -> Iterator[RawRow]:
    def column(name: str | None) -> Iterable[object]:
        if name is None or name not in chunk.columns:
            return repeat(None, len(chunk))
        return chunk[name].tolist()

    overflow = [name for name in chunk.columns if name.startswith(_OVERFLOW_PREFIX)]
    if overflow:
        extra = chunk[overflow].map(_cell).notna().any(axis=1).tolist()
    else:
        extra = repeat(False, len(chunk))
    columns = zip(
        column(format_config.text_a),
        column(format_config.text_b),
        column(format_config.label),
        column(format_config.id_a),
        column(format_config.id_b),
        column(format_config.row_id),
        column(format_config.provenance),
        extra,
    )
    for values in columns:
        yield RawRow(*values)


def parse_dataset(
    source: BinaryIO,
    format_config: FormatConfig,
    split: Split = Split.TRAIN,
    source_name: str | None = None,
) -> tuple[LabeledDataset, ParseReport]:
    """Read a delimited sentence-pair table into a LabeledDataset.

    Chunks are consumed in file order, so the result matches a single-pass
    sequential read. Per-row problems land in the ParseReport; only an
    unreadable stream or a table without the required columns is fatal.
    """
    builder = DatasetBuilder(split, source_name)
    required = [format_config.text_a, format_config.text_b, format_config.label]

    def on_bad_line(fields: list[str]) -> None:
        builder.add_rejected_line(fields)
        return None

    try:
        for chunk in _iter_chunks(source, format_config, on_bad_line):
            missing = [name for name in required if name not in chunk.columns]
            if missing:
                raise CorpusFormatError(f"missing required columns: {missing}")
            for row in _rows_of(chunk, format_config):
                builder.add_row(row)
    except pd.errors.EmptyDataError:
        logger.warning("%s is empty", source_name or "input")
    except pd.errors.ParserError as exc:
        raise CorpusFormatError(f"cannot tokenize {source_name or 'input'}: {exc}") from exc
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusReadError(f"cannot read {source_name or 'input'}: {exc}") from exc

    dataset, report = builder.finish()
    if not dataset.pairs:
        logger.warning("%s yielded no pairs", source_name or "input")
    logger.info(
        "parsed %s: %d rows read, %d pairs kept, %d issues",
        source_name or split,
        report.rows_read,
        report.pairs_kept,
        len(report.issues),
    )
    return dataset, report


def read_dataset(
    path: Path, format_config: FormatConfig, split: Split
) -> tuple[LabeledDataset, ParseReport]:
    try:
        with path.open("rb") as handle:
            return parse_dataset(handle, format_config, split, source_name=str(path))
    except OSError as exc:
        raise CorpusReadError(f"cannot open {path}: {exc}") from exc


def write_dataset(dataset: LabeledDataset, sink: BinaryIO, format_config: FormatConfig) -> int:
    """Write one row per pair, sorted by (a, b), and return the row count.

    Labels are written as 1/0 and a provenance column is appended after the
    original columns. Rows keep their first source row id and sentences their
    smallest source id; pairs without a source row (inferred ones) get a
    generated id and sentences without one fall back to their node id.
    """
    text_sink = io.TextIOWrapper(sink, encoding=format_config.encoding, newline="", write_through=True)
    quoting = format_config.effective_quoting
    writer_options: dict = {
        "delimiter": format_config.delimiter,
        "lineterminator": "\n",
        "quoting": _QUOTING[quoting],
    }
    if quoting == "none":
        writer_options["quotechar"] = None
    texts = dataset.texts
    qids = {s.node_id: s.source_ids[0] if s.source_ids else s.node_id for s in dataset.sentences}
    try:
        writer = csv.writer(text_sink, **writer_options)
        if format_config.has_header:
            writer.writerow(format_config.output_columns)
        for number, pair in enumerate(dataset.pairs):
            cells = {
                format_config.row_id: pair.row_ids[0] if pair.row_ids else f"{pair.provenance}-{number}",
                format_config.id_a: qids[pair.a],
                format_config.id_b: qids[pair.b],
                format_config.text_a: texts[pair.a],
                format_config.text_b: texts[pair.b],
                format_config.label: pair.label.as_int,
                format_config.provenance: pair.provenance.value,
            }
            writer.writerow([cells[name] for name in format_config.output_columns])
        text_sink.flush()
    except (OSError, csv.Error) as exc:
        raise CorpusWriteError(f"cannot write dataset: {exc}") from exc
    finally:
        text_sink.detach()
    return len(dataset.pairs)


def write_dataset_file(dataset: LabeledDataset, path: Path, format_config: FormatConfig) -> int:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("wb") as handle:
            return write_dataset(dataset, handle, format_config)
    except OSError as exc:
        raise CorpusWriteError(f"cannot write {path}: {exc}") from exc


def compute_stats(dataset: LabeledDataset) -> DatasetStats:
    """Count pairs by label and provenance."""
    n_positive = sum(1 for p in dataset.pairs if p.label is Label.POSITIVE)
    total = len(dataset.pairs)
    by_provenance = {kind: 0 for kind in Provenance}
    for pair in dataset.pairs:
        by_provenance[pair.provenance] += 1
    return DatasetStats(
        split=dataset.split,
        n_positive=n_positive,
        n_negative=total - n_positive,
        total=total,
        positive_ratio=100.0 * n_positive / total if total else None,
        n_by_provenance=by_provenance,
    )
