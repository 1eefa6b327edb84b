"""Cutting-line filter over per-frame similarity traces.

Every frame is scored by cosine similarity against a query term in the
shared embedding space. The mean of those scores, shifted by an operator
correction constant, is the cutting line: frames strictly above it pass.
A sorted view of the trace makes the decision boundary visible.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

from .embedding import EmbeddingBackend, EmbeddingCache, cosine, embed_image, embed_text
from .errors import EmptyTrace
from .ingest import FrameSequence

DEFAULT_QUERY = "smoking"


@dataclass(frozen=True)
class SimilarityTrace:
    """Per-frame cosine similarities in chronological order."""

    values: tuple[float, ...]
    source_id: str

    def __post_init__(self) -> None:
        for v in self.values:
            if not -1.0 <= v <= 1.0:
                raise ValueError(f"similarity {v} outside [-1, 1]")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class CutLineConfig:
    """Threshold configuration: mean + correction, default correction 0."""

    correction: float = 0.0
    query_term: str = DEFAULT_QUERY

    def __post_init__(self) -> None:
        if not math.isfinite(self.correction):
            raise ValueError("correction must be finite")
        if not self.query_term:
            raise ValueError("query term must be non-empty")

    @property
    def multi_word_query(self) -> bool:
        # single-word queries keep the measurement easy to interpret;
        # multi-word ones are accepted but flagged in run metadata
        return len(self.query_term.split()) > 1


@dataclass(frozen=True)
class FrameSelection:
    """Frame ordinals judged positive by one stage, with its threshold."""

    indices: tuple[int, ...]
    threshold: float
    source_id: str | None = None

    def __post_init__(self) -> None:
        for prev, cur in zip(self.indices, self.indices[1:]):
            if cur <= prev:
                raise ValueError("selection indices must be strictly increasing")

    def __len__(self) -> int:
        return len(self.indices)


def build_trace(
    frames: FrameSequence,
    query: str,
    backend: EmbeddingBackend,
    cache: EmbeddingCache | None = None,
) -> SimilarityTrace:
    """Score every frame against the query term, in chronological order."""
    if len(frames) == 0:
        raise EmptyTrace(f"no frames to score in {frames.source_id!r}")
    if cache is None:
        cache = EmbeddingCache()
    query_vec = embed_text(query, backend, cache)
    workers = getattr(backend, "max_in_flight", 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vectors = list(pool.map(lambda f: embed_image(f, backend, cache), frames))
    else:
        vectors = [embed_image(f, backend, cache) for f in frames]
    values = tuple(cosine(vec, query_vec) for vec in vectors)
    return SimilarityTrace(values, frames.source_id)


def cutting_line(trace: SimilarityTrace, config: CutLineConfig) -> float:
    """Arithmetic mean of the trace plus the correction constant."""
    if len(trace) == 0:
        raise EmptyTrace("cannot take the mean of an empty trace")
    return sum(trace.values) / len(trace.values) + config.correction


def filter_frames(trace: SimilarityTrace, threshold: float) -> FrameSelection:
    """Select indices whose similarity is strictly above the threshold."""
    if len(trace) == 0:
        raise EmptyTrace("cannot filter an empty trace")
    indices = tuple(i for i, v in enumerate(trace.values) if v > threshold)
    return FrameSelection(indices, threshold=threshold, source_id=trace.source_id)


def sorted_trace(trace: SimilarityTrace) -> list[tuple[int, float]]:
    """(original index, value) pairs ascending by value, ties by index."""
    if len(trace) == 0:
        raise EmptyTrace("cannot sort an empty trace")
    return sorted(enumerate(trace.values), key=lambda pair: (pair[1], pair[0]))


# trace artifact: JSONL with one header record, then one record per frame ----

def write_trace_jsonl(
    fp: IO[str],
    trace: SimilarityTrace,
    threshold: float,
    config: CutLineConfig,
    timestamps: Iterable[float] | None = None,
) -> None:
    header = {
        "source_id": trace.source_id,
        "query": config.query_term,
        "correction": config.correction,
        "threshold": threshold,
        "n": len(trace),
        "multi_word_query": config.multi_word_query,
    }
    fp.write(json.dumps(header, ensure_ascii=False) + "\n")
    ts = list(timestamps) if timestamps is not None else [float(i) for i in range(len(trace))]
    for i, sim in enumerate(trace.values):
        fp.write(json.dumps({"i": i, "t": ts[i], "sim": sim}) + "\n")


@dataclass(frozen=True)
class TraceFile:
    header: dict
    trace: SimilarityTrace
    timestamps: tuple[float, ...] = field(default=())


def read_trace_jsonl(path: str | Path) -> TraceFile:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise EmptyTrace(f"trace file {path} is empty")
    header = json.loads(lines[0])
    values: list[float] = []
    timestamps: list[float] = []
    for line in lines[1:]:
        rec = json.loads(line)
        values.append(float(rec["sim"]))
        timestamps.append(float(rec["t"]))
    return TraceFile(
        header=header,
        trace=SimilarityTrace(tuple(values), str(header.get("source_id", ""))),
        timestamps=tuple(timestamps),
    )
