"""Per-frame classification, selection fusion, segments, and metrics.

The classifier is a pluggable backend emitting a smoking probability per
frame. Its selection is fused with the similarity filter's by strict
intersection, so the combined detection can only shrink, never grow.
"""

from __future__ import annotations

import base64
import threading
from dataclasses import dataclass
from typing import Iterable, Protocol

import httpx

from .errors import (
    BackendUnavailable,
    IndexOutOfRange,
    MalformedResponse,
    MismatchedSource,
)
from .filtering import FrameSelection
from .ingest import Frame, FrameSequence

FUSION_RULE = "intersection"
DEFAULT_DECISION_THRESHOLD = 0.5


class ClassifierBackend(Protocol):
    backend_id: str
    decision_threshold: float

    def probability(self, frame: Frame) -> float: ...


class MockClassifierBackend:
    """Self-labeling mock: probability 1.0 on planted-positive frames.

    ``positive`` normally comes from a fixture manifest's ``smoking_frames``.
    """

    def __init__(self, positive: Iterable[int] = (), decision_threshold: float = DEFAULT_DECISION_THRESHOLD):
        self.positive = frozenset(int(i) for i in positive)
        self.decision_threshold = decision_threshold
        self.backend_id = "mock-classifier"

    def probability(self, frame: Frame) -> float:
        return 1.0 if frame.index in self.positive else 0.0


class RemoteClassifierBackend:
    """Client for an external classifier service.

    Wire protocol: POST {endpoint}/classify with ``{"data": <base64 raster>}``;
    response ``{"p": float}`` with p in [0, 1].
    """

    def __init__(
        self,
        endpoint: str,
        decision_threshold: float = DEFAULT_DECISION_THRESHOLD,
        timeout: float = 10.0,
        max_in_flight: int = 8,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.backend_id = f"remote:{self.endpoint}"
        self.decision_threshold = decision_threshold
        self.max_in_flight = max_in_flight
        self._client = client or httpx.Client(timeout=timeout)
        self._slots = threading.BoundedSemaphore(max_in_flight)

    def probability(self, frame: Frame) -> float:
        payload = base64.b64encode(frame.pixels.tobytes()).decode("ascii")
        with self._slots:
            try:
                resp = self._client.post(f"{self.endpoint}/classify", json={"data": payload})
                resp.raise_for_status()
            except httpx.HTTPError as exc:
                raise BackendUnavailable(f"classifier service: {exc}") from exc
        try:
            p = float(resp.json()["p"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedResponse("classifier response lacks a numeric 'p'") from exc
        if not 0.0 <= p <= 1.0:
            raise MalformedResponse(f"probability {p} outside [0, 1]")
        return p


def classify_frames(
    frames: FrameSequence,
    selection: FrameSelection,
    backend: ClassifierBackend,
) -> FrameSelection:
    """Classify only filter-passed frames; keep those above the decision threshold."""
    _check_indices(selection.indices, len(frames))
    kept = tuple(
        i
        for i in selection.indices
        if backend.probability(frames.frames[i]) > backend.decision_threshold
    )
    return FrameSelection(kept, threshold=backend.decision_threshold, source_id=frames.source_id)


def classify_all(frames: FrameSequence, backend: ClassifierBackend) -> FrameSelection:
    """Standalone classifier evaluation over every frame, no filter in front."""
    full = FrameSelection(
        tuple(range(len(frames))), threshold=float("-inf"), source_id=frames.source_id
    )
    return classify_frames(frames, full, backend)


def fuse(filter_sel: FrameSelection, classifier_sel: FrameSelection) -> FrameSelection:
    """Strict intersection of the two branch selections, ascending."""
    a, b = filter_sel.source_id, classifier_sel.source_id
    if a is not None and b is not None and a != b:
        raise MismatchedSource(f"selections come from different sources: {a!r} vs {b!r}")
    common = sorted(set(filter_sel.indices) & set(classifier_sel.indices))
    return FrameSelection(tuple(common), threshold=filter_sel.threshold, source_id=a or b)


@dataclass(frozen=True)
class DetectionSegment:
    """Half-open [start, end) interval in seconds covering consecutive frames."""

    start: float
    end: float
    frame_indices: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.start < self.end:
            raise ValueError("segment start must precede end")


def segments_from_selection(selection: FrameSelection, rate: float = 1.0) -> list[DetectionSegment]:
    """Group maximal runs of consecutive indices into [first, last+1) segments."""
    segments: list[DetectionSegment] = []
    run: list[int] = []
    for i in selection.indices:
        if run and i != run[-1] + 1:
            segments.append(_segment(run, rate))
            run = []
        run.append(i)
    if run:
        segments.append(_segment(run, rate))
    return segments


def _segment(run: list[int], rate: float) -> DetectionSegment:
    return DetectionSegment(run[0] / rate, (run[-1] + 1) / rate, tuple(run))


@dataclass(frozen=True)
class DetectionMetrics:
    frame_accuracy: float
    duration_error: float
    predicted_duration: float
    true_duration: float
    confusion: dict[str, int]


def _check_indices(indices: Iterable[int], total: int) -> None:
    for i in indices:
        if i < 0 or i >= total:
            raise IndexOutOfRange(f"frame index {i} outside [0, {total})")


def evaluate_detection(
    predicted: FrameSelection,
    truth: FrameSelection,
    total_frames: int,
) -> DetectionMetrics:
    """Per-frame confusion counts at 1 fps; durations in seconds."""
    _check_indices(predicted.indices, total_frames)
    _check_indices(truth.indices, total_frames)
    pred = set(predicted.indices)
    gold = set(truth.indices)
    tp = len(pred & gold)
    fp = len(pred - gold)
    fn = len(gold - pred)
    tn = total_frames - tp - fp - fn
    accuracy = (tp + tn) / total_frames if total_frames else 1.0
    return DetectionMetrics(
        frame_accuracy=accuracy,
        duration_error=float(abs(len(pred) - len(gold))),
        predicted_duration=float(len(pred)),
        true_duration=float(len(gold)),
        confusion={"tp": tp, "fp": fp, "tn": tn, "fn": fn},
    )


def summarize_metrics(all_metrics: Iterable[DetectionMetrics]) -> dict[str, float]:
    """Report-level aggregation: per-video metrics averaged across videos."""
    items = list(all_metrics)
    if not items:
        return {"videos": 0, "mean_accuracy": 0.0, "mean_duration_error": 0.0}
    return {
        "videos": len(items),
        "mean_accuracy": sum(m.frame_accuracy for m in items) / len(items),
        "mean_duration_error": sum(m.duration_error for m in items) / len(items),
    }
