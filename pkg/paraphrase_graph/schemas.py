"""Pydantic models for datasets, graph artifacts and reports."""

from enum import StrEnum
from functools import cached_property
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Label(StrEnum):
    """Sign of an edge: paraphrase or non-paraphrase."""

    POSITIVE = "positive"
    NEGATIVE = "negative"

    @property
    def as_int(self) -> int:
        return 1 if self is Label.POSITIVE else 0


class Provenance(StrEnum):
    """Where a labeled pair came from."""

    ORIGINAL = "original"
    INFERRED_POSITIVE = "inferred_positive"
    INFERRED_NEGATIVE = "inferred_negative"
    FLIPPED = "flipped"

    @property
    def implied_label(self) -> Label | None:
        """The only label a pair of this provenance may carry; None for original pairs."""
        return _LABEL_FOR_PROVENANCE.get(self)


class Split(StrEnum):
    TRAIN = "train"
    TEST = "test"


class BalanceClass(StrEnum):
    """Structural-balance class of a signed triad."""

    BALANCED = "balanced"
    WEAKLY_BALANCED = "weakly_balanced"
    IMBALANCED = "imbalanced"


class ConflictHandling(StrEnum):
    """What to do with a pair both inference rules claim."""

    DROP = "drop"
    PREFER_POSITIVE = "prefer-positive"
    PREFER_NEGATIVE = "prefer-negative"


class ReportFormat(StrEnum):
    TEXT = "text"
    STRUCTURED = "structured"


class Variant(StrEnum):
    """The four dataset variants a pipeline run emits."""

    ORIGINAL = "original"
    ORIGINAL_FLIPPED = "original_flipped"
    AUGMENTED = "augmented"
    AUGMENTED_FLIPPED = "augmented_flipped"


class IssueKind(StrEnum):
    MALFORMED = "malformed"
    BAD_LABEL = "bad_label"
    EMPTY_SENTENCE = "empty_sentence"
    SELF_PAIR = "self_pair"
    MERGED_DUPLICATE = "merged_duplicate"
    RAW_DUPLICATE_CONFLICT = "raw_duplicate_conflict"


_LABEL_FOR_PROVENANCE = {
    Provenance.FLIPPED: Label.POSITIVE,
    Provenance.INFERRED_POSITIVE: Label.POSITIVE,
    Provenance.INFERRED_NEGATIVE: Label.NEGATIVE,
}


def _sorted_unique(values: tuple[str, ...]) -> tuple[str, ...]:
    return tuple(sorted(set(values)))


# ---------------------------------------------------------------------------
# Corpus
# ---------------------------------------------------------------------------


class Sentence(BaseModel):
    """A canonical sentence and its graph node id."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    node_id: int = Field(..., ge=0, description="Surrogate key of the sentence node")
    text: str = Field(..., min_length=1, description="Canonical sentence text")
    source_ids: tuple[str, ...] = Field(
        default=(), description="External ids (e.g. QQP qids) that mapped to this node"
    )

    @field_validator("source_ids")
    @classmethod
    def normalize_source_ids(cls, v: tuple[str, ...]) -> tuple[str, ...]:
        return _sorted_unique(v)


class LabeledPair(BaseModel):
    """An unordered sentence pair with its sign, stored as a < b."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    a: int = Field(..., ge=0, description="Smaller node id")
    b: int = Field(..., ge=0, description="Larger node id")
    label: Label
    provenance: Provenance = Provenance.ORIGINAL
    row_ids: tuple[str, ...] = Field(
        default=(), description="Source rows that contributed this pair"
    )

    @field_validator("row_ids")
    @classmethod
    def normalize_row_ids(cls, v: tuple[str, ...]) -> tuple[str, ...]:
        return _sorted_unique(v)

    @model_validator(mode="after")
    def check_order_and_provenance(self) -> "LabeledPair":
        if self.a == self.b:
            raise ValueError(f"self-pair on node {self.a}")
        if self.a > self.b:
            raise ValueError(f"pair ({self.a}, {self.b}) is not in canonical order")
        expected = self.provenance.implied_label
        if expected is not None and self.label is not expected:
            raise ValueError(f"{self.provenance} pairs must be {expected}")
        return self

    @property
    def key(self) -> tuple[int, int]:
        return (self.a, self.b)


class LabeledDataset(BaseModel):
    """One split of a sentence-pair dataset. Pairs are kept sorted by (a, b)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    split: Split
    sentences: tuple[Sentence, ...] = ()
    pairs: tuple[LabeledPair, ...] = ()

    @field_validator("sentences")
    @classmethod
    def sort_sentences(cls, v: tuple[Sentence, ...]) -> tuple[Sentence, ...]:
        return tuple(sorted(v, key=lambda s: s.node_id))

    @field_validator("pairs")
    @classmethod
    def sort_pairs(cls, v: tuple[LabeledPair, ...]) -> tuple[LabeledPair, ...]:
        return tuple(sorted(v, key=lambda p: p.key))

    @model_validator(mode="after")
    def check_references(self) -> "LabeledDataset":
        node_ids = {s.node_id for s in self.sentences}
        if len(node_ids) != len(self.sentences):
            raise ValueError("duplicate sentence node ids")
        if len({s.text for s in self.sentences}) != len(self.sentences):
            raise ValueError("two sentences share the same canonical text")
        previous: tuple[int, int] | None = None
        for pair in self.pairs:
            if pair.a not in node_ids or pair.b not in node_ids:
                raise ValueError(f"pair {pair.key} references an unknown sentence")
            if pair.key == previous:
                raise ValueError(f"duplicate pair {pair.key}")
            previous = pair.key
        return self

    @cached_property
    def texts(self) -> dict[int, str]:
        return {s.node_id: s.text for s in self.sentences}

    @cached_property
    def pair_index(self) -> dict[tuple[int, int], LabeledPair]:
        return {p.key: p for p in self.pairs}


class DatasetStats(BaseModel):
    """Label and provenance counts of one dataset split."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    split: Split
    n_positive: int = Field(..., ge=0)
    n_negative: int = Field(..., ge=0)
    total: int = Field(..., ge=0)
    positive_ratio: float | None = Field(
        None, description="100 * n_positive / total; absent for an empty split"
    )
    n_by_provenance: dict[Provenance, int] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_conservation(self) -> "DatasetStats":
        if self.n_positive + self.n_negative != self.total:
            raise ValueError("label counts do not sum to total")
        if sum(self.n_by_provenance.values()) != self.total:
            raise ValueError("provenance counts do not sum to total")
        return self


class FormatConfig(BaseModel):
    """Layout of a delimited sentence-pair table."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    delimiter: str = Field("\t", min_length=1, max_length=1)
    has_header: bool = True
    column_names: tuple[str, ...] | None = Field(
        None, description="Column names for headerless input; defaults to the output layout"
    )
    text_a: str = "question1"
    text_b: str = "question2"
    label: str = "is_duplicate"
    id_a: str | None = "qid1"
    id_b: str | None = "qid2"
    row_id: str | None = "id"
    provenance: str = "provenance"
    quoting: Literal["minimal", "none"] = "none"
    encoding: str = "utf-8"

    @classmethod
    def qqp(cls, **overrides) -> "FormatConfig":
        return cls(**overrides)

    @classmethod
    def generic(cls, **overrides) -> "FormatConfig":
        defaults = dict(
            text_a="sentence1",
            text_b="sentence2",
            label="label",
            id_a=None,
            id_b=None,
            row_id=None,
            quoting="minimal",
        )
        return cls(**(defaults | overrides))

    @property
    def output_columns(self) -> list[str]:
        columns = [self.row_id, self.id_a, self.id_b, self.text_a, self.text_b, self.label]
        return [c for c in columns if c is not None] + [self.provenance]

    @property
    def input_names(self) -> list[str] | None:
        if self.has_header:
            return None
        return list(self.column_names) if self.column_names else self.output_columns

    @property
    def effective_quoting(self) -> Literal["minimal", "none"]:
        """Quoting used for reading and writing. Canonical text never holds a tab,
        so unquoted fields are only safe with a tab delimiter."""
        return self.quoting if self.delimiter == "\t" else "minimal"


class RowIssue(BaseModel):
    """A recoverable problem with one input row."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    row_number: int | None = Field(
        None, description="1-based data row number; absent for lines the tokenizer rejected"
    )
    kind: IssueKind
    detail: str


class RawDuplicateConflict(BaseModel):
    """The same unordered pair labeled both ways in one file."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    text_a: str
    text_b: str
    positive_rows: tuple[str, ...]
    negative_rows: tuple[str, ...]


class ParseReport(BaseModel):
    """What happened to the rows of one input table."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    source: str | None = None
    split: Split
    rows_read: int = 0
    rows_kept: int = 0
    pairs_kept: int = 0
    merged_duplicates: int = 0
    self_pairs: int = 0
    issues: tuple[RowIssue, ...] = ()
    raw_duplicate_conflicts: tuple[RawDuplicateConflict, ...] = ()


# ---------------------------------------------------------------------------
# Graph artifacts
# ---------------------------------------------------------------------------


class PositivePath(BaseModel):
    """A simple path whose consecutive nodes share a positive edge."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    nodes: tuple[int, ...] = Field(..., min_length=1)

    @field_validator("nodes")
    @classmethod
    def no_repeats(cls, v: tuple[int, ...]) -> tuple[int, ...]:
        if len(set(v)) != len(v):
            raise ValueError("path repeats a node")
        return v

    @property
    def length(self) -> int:
        return len(self.nodes) - 1


class ClusterIndex(BaseModel):
    """Partition of the nodes into positive-edge connected components."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    component_of: dict[int, int]
    members: dict[int, tuple[int, ...]]

    def same_cluster(self, u: int, v: int) -> bool:
        return self.component_of[u] == self.component_of[v]

    def partition(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset(m) for m in self.members.values())


class ClusterSummary(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_nodes: int
    n_clusters: int
    n_non_singleton: int
    largest: int
    size_histogram: dict[int, int] = Field(
        default_factory=dict, description="cluster size -> number of clusters"
    )


class Conflict(BaseModel):
    """A negative edge whose endpoints are positively connected."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    a: int
    b: int
    witness: PositivePath
    cluster: int

    @model_validator(mode="after")
    def check_witness_endpoints(self) -> "Conflict":
        if self.a >= self.b:
            raise ValueError("conflict edge must be in canonical order")
        if self.witness.nodes[0] != self.a or self.witness.nodes[-1] != self.b:
            raise ValueError("witness does not join the conflict endpoints")
        return self

    @property
    def key(self) -> tuple[int, int]:
        return (self.a, self.b)


class ConflictReport(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    split: Split
    conflicts: tuple[Conflict, ...] = ()

    @field_validator("conflicts")
    @classmethod
    def sorted_unique(cls, v: tuple[Conflict, ...]) -> tuple[Conflict, ...]:
        ordered = tuple(sorted(v, key=lambda c: c.key))
        if len({c.key for c in ordered}) != len(ordered):
            raise ValueError("duplicate conflict edge")
        return ordered


class FlipEntry(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    a: int
    b: int
    old_label: Label
    new_label: Label

    @model_validator(mode="after")
    def negative_to_positive(self) -> "FlipEntry":
        if (self.old_label, self.new_label) != (Label.NEGATIVE, Label.POSITIVE):
            raise ValueError("only negative-to-positive flips are allowed")
        return self


class FlipLog(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    split: Split
    flipped: tuple[FlipEntry, ...] = ()
    merged: tuple[LabeledPair, ...] = Field(
        default=(), description="Flipped pairs folded into an existing positive pair"
    )


class NegativeBasis(BaseModel):
    """The negative edge that licenses a negative inference between two clusters."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    edge: tuple[int, int]
    cluster_x: int
    cluster_y: int


class InferredPair(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    a: int
    b: int
    label: Label
    provenance: Literal[Provenance.INFERRED_POSITIVE, Provenance.INFERRED_NEGATIVE]
    witness: PositivePath | None = None
    negative_basis: NegativeBasis | None = None

    @model_validator(mode="after")
    def check_consistency(self) -> "InferredPair":
        if self.a >= self.b:
            raise ValueError("inferred pair must be in canonical order with a != b")
        if _LABEL_FOR_PROVENANCE[self.provenance] is not self.label:
            raise ValueError(f"{self.provenance} does not match label {self.label}")
        return self

    @property
    def key(self) -> tuple[int, int]:
        return (self.a, self.b)

    def to_labeled_pair(self) -> LabeledPair:
        return LabeledPair(a=self.a, b=self.b, label=self.label, provenance=self.provenance)


class AugmentationPolicy(BaseModel):
    """Which inferences to apply and how to settle contested pairs."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    infer_positives: bool = True
    infer_negatives: bool = True
    conflicted_pair_handling: ConflictHandling = ConflictHandling.DROP
    max_cluster_pairs: int | None = Field(
        None, ge=0, description="Cap on inferred positives per cluster"
    )


class TruncationEvent(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    cluster: int
    cluster_size: int
    candidate_pairs: int
    kept: int


class AugmentationReport(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    split: Split
    policy: AugmentationPolicy
    n_original: int
    n_inferred_positive: int
    n_inferred_negative: int
    conflicted_clusters: int = 0
    conflicted_pairs: int = Field(
        0, description="Pairs claimed by both inference rules"
    )
    truncations: tuple[TruncationEvent, ...] = ()
    n_by_provenance: dict[Provenance, int] = Field(default_factory=dict)


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


class PipelineConfig(BaseModel):
    """Validated settings for one CLI run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    input_train: Path | None = None
    input_test: Path | None = None
    out_dir: Path = Path("out")
    format: FormatConfig = Field(default_factory=FormatConfig.qqp)
    policy: AugmentationPolicy = Field(default_factory=AugmentationPolicy)
    flip: bool = False
    flip_before_infer: bool = True
    report_format: ReportFormat = ReportFormat.TEXT
    export_graph: bool = False
    reference: Literal["qqp"] | None = None

    @model_validator(mode="after")
    def check_paths(self) -> "PipelineConfig":
        inputs = [p for p in (self.input_train, self.input_test) if p is not None]
        if not inputs:
            raise ValueError("at least one of input_train / input_test is required")
        for path in inputs:
            if not path.is_file():
                raise ValueError(f"input file does not exist: {path}")
        if len(inputs) == 2 and inputs[0].resolve() == inputs[1].resolve():
            raise ValueError("train and test inputs must be different files")
        out_root = self.out_dir.resolve()
        for path in inputs:
            if path.resolve().is_relative_to(out_root):
                raise ValueError(f"input {path} lies inside the output directory {self.out_dir}")
        return self

    def inputs(self) -> list[tuple[Split, Path]]:
        pairs = [(Split.TRAIN, self.input_train), (Split.TEST, self.input_test)]
        return [(split, path) for split, path in pairs if path is not None]


class Deviation(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    metric: str
    expected: int
    actual: int


class SplitSummary(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    split: Split
    conflicts: int
    flips: int
    merged_on_flip: int
    inferred_positive: int
    inferred_negative: int
    expansion_pct: float | None = Field(
        None, description="Growth of Augmented over Original, in percent"
    )


class SummaryRow(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    variant: Variant
    stats: dict[Split, DatasetStats]


class PipelineSummary(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    rows: tuple[SummaryRow, ...]
    splits: tuple[SplitSummary, ...]
    deviations: tuple[Deviation, ...] = ()


# ---------------------------------------------------------------------------
# HTTP surface
# ---------------------------------------------------------------------------


class PairItem(BaseModel):
    """One labeled sentence pair submitted over HTTP."""

    model_config = ConfigDict(str_strip_whitespace=True, extra="forbid")

    sentence_a: str = Field(..., min_length=1, max_length=2000)
    sentence_b: str = Field(..., min_length=1, max_length=2000)
    label: int = Field(..., ge=0, le=1, description="1 = paraphrase, 0 = non-paraphrase")


class PairsRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    items: list[PairItem] = Field(..., min_length=1)
    split: Split = Split.TRAIN


class AugmentRequest(PairsRequest):
    policy: AugmentationPolicy = Field(default_factory=AugmentationPolicy)


class PairRecord(BaseModel):
    """A labeled pair rendered with its sentence texts."""

    model_config = ConfigDict(extra="forbid")

    sentence_a: str
    sentence_b: str
    label: int
    provenance: Provenance


class ConflictRecord(BaseModel):
    """A conflict rendered for human review."""

    model_config = ConfigDict(extra="forbid")

    a: int
    b: int
    sentence_a: str
    sentence_b: str
    cluster: int
    witness: list[str] = Field(..., description="Sentence texts along the positive path")


class CheckResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    split: Split
    weakly_balanced: bool
    conflicts: list[ConflictRecord]
    clusters: ClusterSummary
    triads: dict[BalanceClass, int]
    parse: ParseReport


class DatasetResponse(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pairs: list[PairRecord]
    stats: DatasetStats
    parse: ParseReport
    flip_log: FlipLog | None = None
    augmentation: AugmentationReport | None = None
