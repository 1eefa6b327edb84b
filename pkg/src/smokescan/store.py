"""Append-only persistence for runs, human verdicts, and config versions.

Everything is plain files: one directory per run holding its artifacts,
JSONL logs for verdicts and config changes. A run becomes visible only when
its manifest is committed (written last, atomically), so a crash mid-run
leaves nothing half-registered. Nothing is ever mutated in place; the
latest-wins verdict view is derived from the log on read.
"""

from __future__ import annotations

import errno
import json
import math
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DuplicateRunId, StorageFull, UnknownRun, UnknownUnit

SCHEMA_VERSION = 1
MANIFEST = "manifest.json"
VERDICTS = "verdicts.jsonl"
CONFIG_LOG = "config.jsonl"


def utcnow_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class RunRecord:
    """One pipeline execution; the config snapshot is immutable once written."""

    run_id: str
    source_id: str
    kind: str  # "video" | "text"
    created_at: str
    config: Mapping[str, object]
    unit_count: int  # frames for video, spans for text; bounds verdict units
    threshold: float | None = None
    artifacts: Mapping[str, str] = field(default_factory=dict)

    def to_manifest(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "run_id": self.run_id,
            "source_id": self.source_id,
            "kind": self.kind,
            "created_at": self.created_at,
            "config": dict(self.config),
            "unit_count": self.unit_count,
            "threshold": self.threshold,
            "artifacts": dict(self.artifacts),
        }

    @classmethod
    def from_manifest(cls, data: Mapping[str, object]) -> RunRecord:
        return cls(
            run_id=str(data["run_id"]),
            source_id=str(data["source_id"]),
            kind=str(data["kind"]),
            created_at=str(data["created_at"]),
            config=dict(data.get("config", {})),
            unit_count=int(data["unit_count"]),
            threshold=None if data.get("threshold") is None else float(data["threshold"]),
            artifacts=dict(data.get("artifacts", {})),
        )


@dataclass(frozen=True)
class Verdict:
    """A human confirm/reject decision on one detection unit."""

    run_id: str
    unit: int
    predicted_label: bool
    human_label: bool
    reviewer: str = "anonymous"
    decided_at: str = ""

    def to_json(self) -> dict:
        return {
            "run_id": self.run_id,
            "unit": self.unit,
            "predicted_label": self.predicted_label,
            "human_label": self.human_label,
            "reviewer": self.reviewer,
            "decided_at": self.decided_at or utcnow_iso(),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, object]) -> Verdict:
        return cls(
            run_id=str(data["run_id"]),
            unit=int(data["unit"]),
            predicted_label=bool(data["predicted_label"]),
            human_label=bool(data["human_label"]),
            reviewer=str(data.get("reviewer", "anonymous")),
            decided_at=str(data.get("decided_at", "")),
        )


@dataclass(frozen=True)
class FeedbackExport:
    """Confirmed mislabels from latest verdicts: FP = predicted but rejected,
    FN = missed but confirmed. Units without verdicts are excluded."""

    false_positives: tuple[dict, ...]
    false_negatives: tuple[dict, ...]
    generated_at: str

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "generated_at": self.generated_at,
            "false_positives": list(self.false_positives),
            "false_negatives": list(self.false_negatives),
        }


def _guard_disk(exc: OSError) -> None:
    if exc.errno == errno.ENOSPC:
        raise StorageFull("no space left on device") from exc
    raise exc


class PendingRun:
    """Artifacts staging for one run; nothing is visible until commit()."""

    def __init__(self, store: Store, run_id: str):
        self.store = store
        self.run_id = run_id
        self.path = store.run_path(run_id)
        self.path.mkdir(parents=True, exist_ok=True)

    def write_bytes(self, name: str, data: bytes) -> None:
        try:
            (self.path / name).parent.mkdir(parents=True, exist_ok=True)
            (self.path / name).write_bytes(data)
        except OSError as exc:
            _guard_disk(exc)

    def write_text(self, name: str, text: str) -> None:
        self.write_bytes(name, text.encode("utf-8"))

    def write_json(self, name: str, payload: object) -> None:
        self.write_text(name, json.dumps(payload, ensure_ascii=False, indent=2))

    def commit(self, record: RunRecord) -> str:
        """Write the manifest last, atomically; the run appears all-or-nothing."""
        if record.run_id != self.run_id:
            raise ValueError("record run_id disagrees with pending run")
        manifest_path = self.path / MANIFEST
        if manifest_path.exists():
            raise DuplicateRunId(f"run {self.run_id!r} already committed")
        tmp = self.path / (MANIFEST + ".tmp")
        try:
            with open(tmp, "w", encoding="utf-8") as fp:
                json.dump(record.to_manifest(), fp, ensure_ascii=False, indent=2)
                fp.flush()
                os.fsync(fp.fileno())
            os.replace(tmp, manifest_path)
        except OSError as exc:
            _guard_disk(exc)
        return self.run_id


class Store:
    """Filesystem-backed run store rooted at one directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.runs_root = self.root / "runs"
        self.runs_root.mkdir(parents=True, exist_ok=True)
        self._locks_guard = threading.Lock()
        self._run_locks: dict[str, threading.Lock] = {}
        self._config_lock = threading.Lock()

    # runs --------------------------------------------------------------

    def run_path(self, run_id: str) -> Path:
        if not run_id or "/" in run_id or run_id.startswith("."):
            raise ValueError(f"bad run id {run_id!r}")
        return self.runs_root / run_id

    def begin_run(self, run_id: str) -> PendingRun:
        path = self.run_path(run_id)
        if (path / MANIFEST).exists():
            raise DuplicateRunId(f"run {run_id!r} already exists")
        return PendingRun(self, run_id)

    def record_run(self, record: RunRecord, files: Mapping[str, bytes | str] | None = None) -> str:
        """Convenience: stage ``files`` then commit the manifest."""
        pending = self.begin_run(record.run_id)
        for name, data in (files or {}).items():
            if isinstance(data, str):
                pending.write_text(name, data)
            else:
                pending.write_bytes(name, data)
        return pending.commit(record)

    def has_run(self, run_id: str) -> bool:
        return (self.run_path(run_id) / MANIFEST).is_file()

    def get_run(self, run_id: str) -> RunRecord:
        manifest = self.run_path(run_id) / MANIFEST
        if not manifest.is_file():
            raise UnknownRun(f"no run {run_id!r}")
        return RunRecord.from_manifest(json.loads(manifest.read_text(encoding="utf-8")))

    def list_runs(self) -> list[RunRecord]:
        records = []
        for path in self.runs_root.iterdir():
            if (path / MANIFEST).is_file():  # uncommitted leftovers stay invisible
                records.append(self.get_run(path.name))
        records.sort(key=lambda r: (r.created_at, r.run_id))
        return records

    def artifact_path(self, run_id: str, name: str) -> Path:
        record = self.get_run(run_id)
        rel = record.artifacts.get(name, name)
        return self.run_path(run_id) / rel

    # verdicts ------------------------------------------------------------

    def _run_lock(self, run_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._run_locks.setdefault(run_id, threading.Lock())

    def submit_verdict(self, verdict: Verdict) -> Verdict:
        record = self.get_run(verdict.run_id)
        if not 0 <= verdict.unit < record.unit_count:
            raise UnknownUnit(
                f"unit {verdict.unit} outside [0, {record.unit_count}) for run {verdict.run_id!r}"
            )
        stamped = Verdict(
            run_id=verdict.run_id,
            unit=verdict.unit,
            predicted_label=verdict.predicted_label,
            human_label=verdict.human_label,
            reviewer=verdict.reviewer,
            decided_at=verdict.decided_at or utcnow_iso(),
        )
        line = json.dumps(stamped.to_json(), ensure_ascii=False) + "\n"
        with self._run_lock(verdict.run_id):
            try:
                with open(self.run_path(verdict.run_id) / VERDICTS, "a", encoding="utf-8") as fp:
                    fp.write(line)
                    fp.flush()
            except OSError as exc:
                _guard_disk(exc)
        return stamped

    def verdict_history(self, run_id: str) -> list[Verdict]:
        if not self.has_run(run_id):
            raise UnknownRun(f"no run {run_id!r}")
        path = self.run_path(run_id) / VERDICTS
        if not path.is_file():
            return []
        return [
            Verdict.from_json(json.loads(line))
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]

    def latest_verdicts(self, run_id: str) -> dict[int, Verdict]:
        latest: dict[int, Verdict] = {}
        for v in self.verdict_history(run_id):  # log order; later entries supersede
            latest[v.unit] = v
        return latest

    # feedback ------------------------------------------------------------

    def export_feedback(
        self,
        run_ids: Iterable[str] | None = None,
        generated_at: str | None = None,
    ) -> FeedbackExport:
        ids = list(run_ids) if run_ids is not None else [r.run_id for r in self.list_runs()]
        false_positives = []
        false_negatives = []
        for run_id in ids:
            latest = self.latest_verdicts(run_id)
            for unit in sorted(latest):
                v = latest[unit]
                ref = {"run_id": run_id, "unit": unit}
                if v.predicted_label and not v.human_label:
                    false_positives.append(ref)
                elif not v.predicted_label and v.human_label:
                    false_negatives.append(ref)
        return FeedbackExport(
            false_positives=tuple(false_positives),
            false_negatives=tuple(false_negatives),
            generated_at=generated_at or utcnow_iso(),
        )

    def write_feedback(self, export: FeedbackExport, out: str | Path | None = None) -> Path:
        stamp = export.generated_at.replace(":", "").replace("+", "Z")
        path = Path(out) if out else self.root / f"feedback-{stamp}.json"
        try:
            path.write_text(json.dumps(export.to_json(), ensure_ascii=False, indent=2), encoding="utf-8")
        except OSError as exc:
            _guard_disk(exc)
        return path

    # config versions -------------------------------------------------------

    def update_correction(self, value: float, key: str = "correction") -> int:
        """Append a new config version; prior run snapshots are untouched."""
        value = float(value)
        if not math.isfinite(value):
            raise ValueError("config value must be finite")
        with self._config_lock:
            version = len(self.config_history()) + 1
            entry = {
                "version": version,
                "key": key,
                "value": value,
                "updated_at": utcnow_iso(),
            }
            try:
                with open(self.root / CONFIG_LOG, "a", encoding="utf-8") as fp:
                    fp.write(json.dumps(entry) + "\n")
                    fp.flush()
            except OSError as exc:
                _guard_disk(exc)
        return version

    def config_history(self) -> list[dict]:
        path = self.root / CONFIG_LOG
        if not path.is_file():
            return []
        return [
            json.loads(line)
            for line in path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]

    def current_config(self) -> dict[str, float]:
        merged: dict[str, float] = {}
        for entry in self.config_history():
            merged[entry["key"]] = entry["value"]
        return merged
