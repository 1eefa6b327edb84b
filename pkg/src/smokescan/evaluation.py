"""Run evaluation against gold annotations.

Video gold is a JSON object with the true smoking frame indices; text gold
is the same JSONL span format the tagger exports. Metrics are written next
to the run's other artifacts.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

from .classify import evaluate_detection
from .errors import GoldFormatError
from .filtering import FrameSelection
from .ner import AnnotatedSpan, SpanSource, evaluate_ner, read_spans_jsonl
from .store import SCHEMA_VERSION, Store


def load_video_gold(path: str | Path) -> list[int]:
    """Gold file: {"frames": [indices...]}."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GoldFormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict) or "frames" not in data:
        raise GoldFormatError(f"{path}: expected an object with a 'frames' list")
    try:
        return sorted(int(i) for i in data["frames"])
    except (TypeError, ValueError) as exc:
        raise GoldFormatError(f"{path}: 'frames' must hold integers") from exc


def load_text_gold(path: str | Path) -> list[AnnotatedSpan]:
    """Gold file: span JSONL, identical to the tagger's export format."""
    spans = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            spans.append(
                AnnotatedSpan(
                    start=int(rec["start"]),
                    end=int(rec["end"]),
                    surface=str(rec["surface"]),
                    source=SpanSource.HUMAN,
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise GoldFormatError(f"{path}: bad span record at line {lineno}: {exc}") from exc
    return spans


def evaluate_run(store: Store, run_id: str, gold_path: str | Path) -> dict:
    """Compute metrics for a stored run and write them next to it."""
    record = store.get_run(run_id)
    if record.kind == "video":
        selection = json.loads(store.artifact_path(run_id, "selection").read_text(encoding="utf-8"))
        predicted = FrameSelection(
            tuple(selection["fused_indices"]),
            threshold=float(selection["threshold"]),
            source_id=record.source_id,
        )
        gold = FrameSelection(
            tuple(load_video_gold(gold_path)), threshold=0.0, source_id=record.source_id
        )
        metrics = evaluate_detection(predicted, gold, record.unit_count)
        payload = {"schema_version": SCHEMA_VERSION, "kind": "video", **asdict(metrics)}
    else:
        text = store.artifact_path(run_id, "text").read_text(encoding="utf-8")
        predicted_spans = read_spans_jsonl(store.artifact_path(run_id, "spans"))
        gold_spans = load_text_gold(gold_path)
        report = evaluate_ner(predicted_spans, gold_spans, text)
        payload = {"schema_version": SCHEMA_VERSION, "kind": "text", **asdict(report)}
    out = store.run_path(run_id) / "metrics.json"
    out.write_text(json.dumps(payload, ensure_ascii=False, indent=2), encoding="utf-8")
    return payload
