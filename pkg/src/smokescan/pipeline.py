"""End-to-end scan orchestration: ingest, filter, classify, fuse, persist.

The video path follows the architecture's flow: sample frames, score them
against the query term, cut at the mean line, classify the survivors, and
intersect the two selections. The text path routes to the gazetteer tagger.
All artifacts land in the run store; a run commits atomically or not at all.
"""

from __future__ import annotations

import io
import json
import uuid
from dataclasses import dataclass, field

from PIL import Image

from .classify import (
    FUSION_RULE,
    ClassifierBackend,
    DetectionSegment,
    MockClassifierBackend,
    RemoteClassifierBackend,
    classify_frames,
    fuse,
    segments_from_selection,
)
from .config import Settings
from .embedding import (
    EmbeddingBackend,
    EmbeddingCache,
    MockEmbeddingBackend,
    RemoteEmbeddingBackend,
)
from .filtering import (
    CutLineConfig,
    FrameSelection,
    SimilarityTrace,
    build_trace,
    cutting_line,
    filter_frames,
    write_trace_jsonl,
)
from .ingest import FrameSequence, VideoDecoder, sample_frames
from .ner import AnnotatedSpan, Gazetteer, gazetteer_match, write_spans_jsonl
from .store import SCHEMA_VERSION, RunRecord, Store, utcnow_iso


def new_run_id() -> str:
    return f"run-{uuid.uuid4().hex[:12]}"


def make_backends(
    settings: Settings,
    mode: str = "mock",
    planted: frozenset[int] = frozenset(),
) -> tuple[EmbeddingBackend, ClassifierBackend]:
    """Backend pair for a scan; mock mode needs no services running."""
    if mode == "mock":
        return (
            MockEmbeddingBackend(settings.seed),
            MockClassifierBackend(planted, settings.decision_threshold),
        )
    if mode == "remote":
        if not settings.embed_endpoint or not settings.classify_endpoint:
            raise ValueError("remote mode needs embed_endpoint and classify_endpoint")
        return (
            RemoteEmbeddingBackend(settings.embed_endpoint),
            RemoteClassifierBackend(settings.classify_endpoint, settings.decision_threshold),
        )
    raise ValueError(f"unknown backend mode {mode!r}")


@dataclass(frozen=True)
class VideoScanResult:
    frames: FrameSequence
    trace: SimilarityTrace
    config: CutLineConfig
    threshold: float
    filter_selection: FrameSelection
    classifier_selection: FrameSelection
    fused: FrameSelection
    segments: tuple[DetectionSegment, ...] = field(default=())


def scan_video(
    decoder: VideoDecoder,
    embed_backend: EmbeddingBackend,
    classifier_backend: ClassifierBackend,
    config: CutLineConfig,
    cache: EmbeddingCache | None = None,
) -> VideoScanResult:
    frames = sample_frames(decoder)
    trace = build_trace(frames, config.query_term, embed_backend, cache)
    threshold = cutting_line(trace, config)
    filter_sel = filter_frames(trace, threshold)
    classifier_sel = classify_frames(frames, filter_sel, classifier_backend)
    fused = fuse(filter_sel, classifier_sel)
    return VideoScanResult(
        frames=frames,
        trace=trace,
        config=config,
        threshold=threshold,
        filter_selection=filter_sel,
        classifier_selection=classifier_sel,
        fused=fused,
        segments=tuple(segments_from_selection(fused)),
    )


def persist_video_run(
    store: Store,
    result: VideoScanResult,
    config_snapshot: dict,
    run_id: str | None = None,
    created_at: str | None = None,
    save_frames: bool = True,
) -> str:
    run_id = run_id or new_run_id()
    pending = store.begin_run(run_id)

    buf = io.StringIO()
    write_trace_jsonl(
        buf,
        result.trace,
        result.threshold,
        result.config,
        timestamps=[f.timestamp for f in result.frames],
    )
    pending.write_text("trace.jsonl", buf.getvalue())
    pending.write_json(
        "selection.json",
        {
            "schema_version": SCHEMA_VERSION,
            "threshold": result.threshold,
            "filter_indices": list(result.filter_selection.indices),
            "classifier_indices": list(result.classifier_selection.indices),
            "fused_indices": list(result.fused.indices),
            "fusion": FUSION_RULE,
        },
    )
    segments = [[s.start, s.end] for s in result.segments]
    pending.write_json(
        "segments.json",
        {"schema_version": SCHEMA_VERSION, "segments": segments, "fusion": FUSION_RULE},
    )
    detection = {
        "video": result.frames.source_id,
        "segments": segments,
        "metrics": None,
        "fusion": FUSION_RULE,
    }
    pending.write_text("detection.jsonl", json.dumps(detection) + "\n")
    if save_frames:
        for frame in result.frames:
            png = io.BytesIO()
            Image.fromarray(frame.pixels, mode="RGB").save(png, format="PNG")
            pending.write_bytes(f"frames/{frame.index:05d}.png", png.getvalue())

    record = RunRecord(
        run_id=run_id,
        source_id=result.frames.source_id,
        kind="video",
        created_at=created_at or utcnow_iso(),
        config=config_snapshot,
        unit_count=len(result.frames),
        threshold=result.threshold,
        artifacts={
            "trace": "trace.jsonl",
            "selection": "selection.json",
            "segments": "segments.json",
            "detection": "detection.jsonl",
        },
    )
    return pending.commit(record)


def scan_text(text: str, gaz: Gazetteer) -> list[AnnotatedSpan]:
    return gazetteer_match(text, gaz)


def persist_text_run(
    store: Store,
    source_id: str,
    text: str,
    spans: list[AnnotatedSpan],
    config_snapshot: dict,
    run_id: str | None = None,
    created_at: str | None = None,
) -> str:
    run_id = run_id or new_run_id()
    pending = store.begin_run(run_id)
    pending.write_text("text.txt", text)
    buf = io.StringIO()
    write_spans_jsonl(buf, spans)
    pending.write_text("spans.jsonl", buf.getvalue())
    record = RunRecord(
        run_id=run_id,
        source_id=source_id,
        kind="text",
        created_at=created_at or utcnow_iso(),
        config=config_snapshot,
        unit_count=len(spans),
        threshold=None,
        artifacts={"text": "text.txt", "spans": "spans.jsonl"},
    )
    return pending.commit(record)


def config_snapshot(settings: Settings, config: CutLineConfig, backend_ids: dict[str, str]) -> dict:
    """Frozen per-run record of everything that shaped the detection."""
    return {
        "correction": config.correction,
        "query": config.query_term,
        "multi_word_query": config.multi_word_query,
        "decision_threshold": settings.decision_threshold,
        "fusion": FUSION_RULE,
        "seed": settings.seed,
        **backend_ids,
    }
