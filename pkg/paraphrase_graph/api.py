"""FastAPI app exposing stats, check, flip and augment over JSON pair lists."""

import logging
import os

from dotenv import load_dotenv
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from .corpus_io import CorpusFormatError, DatasetBuilder, RawRow, compute_stats
from .pipeline import augmented_variant, check_dataset, flipped_variant
from .reports import conflict_records
from .schemas import (
    AugmentRequest,
    CheckResponse,
    DatasetResponse,
    LabeledDataset,
    PairRecord,
    PairsRequest,
    ParseReport,
)

load_dotenv()
logger = logging.getLogger(__name__)
logging.getLogger("paraphrase_graph").setLevel(os.getenv("PARAPHRASE_GRAPH_LOG_LEVEL", "INFO").upper())

API_MAX_PAIRS = int(os.getenv("API_MAX_PAIRS", "5000"))

app = FastAPI(
    title="Paraphrase Graph API",
    description="""
Treat a labeled sentence-pair list as a signed paraphrase graph.

## Endpoints
- **Stats** - paraphrase / non-paraphrase counts and ratio
- **Check** - negative pairs inside paraphrase clusters, with positive witness paths
- **Flip** - the list with conflicted pairs relabeled as paraphrases
- **Augment** - the list extended with transitively inferred pairs
""",
    version="0.1.0",
)


@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception):
    """Handle unexpected errors with 500 status."""
    logger.exception("unhandled error on %s", request.url.path)
    return JSONResponse(
        status_code=500,
        content={"detail": "Internal server error", "success": False},
    )


def _dataset_from(request: PairsRequest) -> tuple[LabeledDataset, ParseReport]:
    if len(request.items) > API_MAX_PAIRS:
        raise HTTPException(
            status_code=413,
            detail=f"Too many pairs: {len(request.items)} (limit {API_MAX_PAIRS})",
        )
    builder = DatasetBuilder(request.split, source="request")
    for number, item in enumerate(request.items, start=1):
        builder.add_row(
            RawRow(text_a=item.sentence_a, text_b=item.sentence_b, label=str(item.label), row_id=str(number))
        )
    try:
        return builder.finish()
    except CorpusFormatError as e:
        raise HTTPException(status_code=400, detail=str(e))


def _records(dataset: LabeledDataset) -> list[PairRecord]:
    texts = dataset.texts
    return [
        PairRecord(
            sentence_a=texts[p.a],
            sentence_b=texts[p.b],
            label=p.label.as_int,
            provenance=p.provenance,
        )
        for p in dataset.pairs
    ]


@app.get("/health")
async def health_check():
    """Health check endpoint."""
    return {"status": "healthy"}


@app.post("/api/v1/stats", response_model=DatasetResponse)
def stats_endpoint(request: PairsRequest):
    """Counts by label and provenance for the submitted pairs."""
    dataset, parse = _dataset_from(request)
    return DatasetResponse(pairs=_records(dataset), stats=compute_stats(dataset), parse=parse)


@app.post("/api/v1/check", response_model=CheckResponse)
def check_endpoint(request: PairsRequest):
    """
    Find negative pairs whose sentences are connected by paraphrase links.

    Each conflict carries the sentence texts along its shortest positive path.
    """
    dataset, parse = _dataset_from(request)
    check = check_dataset(dataset)
    return CheckResponse(
        split=dataset.split,
        weakly_balanced=not check.report.conflicts,
        conflicts=conflict_records(check.report, dataset),
        clusters=check.clusters,
        triads=check.triads,
        parse=parse,
    )


@app.post("/api/v1/flip", response_model=DatasetResponse)
def flip_endpoint(request: PairsRequest):
    """Relabel every conflicted pair as a paraphrase."""
    dataset, parse = _dataset_from(request)
    result = flipped_variant(dataset)
    return DatasetResponse(
        pairs=_records(result.dataset), stats=result.stats, parse=parse, flip_log=result.flip_log
    )


@app.post("/api/v1/augment", response_model=DatasetResponse)
def augment_endpoint(request: AugmentRequest, flip: bool = False):
    """
    Extend the pairs with inferred paraphrase and non-paraphrase pairs.

    Pass `?flip=true` to repair conflicts before inference.
    """
    dataset, parse = _dataset_from(request)
    result = augmented_variant(dataset, request.policy, flip=flip)
    return DatasetResponse(
        pairs=_records(result.dataset),
        stats=result.stats,
        parse=parse,
        flip_log=result.flip_log,
        augmentation=result.augmentation,
    )
