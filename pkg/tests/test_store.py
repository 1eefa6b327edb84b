from __future__ import annotations

import json
import random

import pytest

from smokescan.errors import DuplicateRunId, UnknownRun, UnknownUnit
from smokescan.store import RunRecord, Store, Verdict


def make_record(run_id: str, unit_count: int = 10, created_at: str = "2026-01-01T00:00:00+00:00") -> RunRecord:
    return RunRecord(
        run_id=run_id,
        source_id=f"src-{run_id}",
        kind="video",
        created_at=created_at,
        config={"correction": 0.0, "query": "smoking", "fusion": "intersection"},
        unit_count=unit_count,
        threshold=0.12,
        artifacts={"trace": "trace.jsonl"},
    )


def store_run(store: Store, run_id: str, **kwargs) -> RunRecord:
    record = make_record(run_id, **kwargs)
    store.record_run(record, {"trace.jsonl": '{"i":0}\n'})
    return record


def oracle_feedback(store: Store, run_ids):
    """Independent replay: read the raw verdict logs, last record per unit wins."""
    fps, fns = [], []
    for run_id in run_ids:
        path = store.run_path(run_id) / "verdicts.jsonl"
        last = {}
        if path.is_file():
            for line in path.read_text(encoding="utf-8").splitlines():
                rec = json.loads(line)
                last[rec["unit"]] = rec
        for unit in sorted(last):
            rec = last[unit]
            if rec["predicted_label"] and not rec["human_label"]:
                fps.append({"run_id": run_id, "unit": unit})
            elif not rec["predicted_label"] and rec["human_label"]:
                fns.append({"run_id": run_id, "unit": unit})
    return fps, fns


class TestRuns:
    def test_round_trip(self, tmp_path):
        store = Store(tmp_path)
        record = store_run(store, "r1")
        back = store.get_run("r1")
        assert back == record
        assert store.artifact_path("r1", "trace").read_text() == '{"i":0}\n'

    def test_duplicate_rejected(self, tmp_path):
        store = Store(tmp_path)
        store_run(store, "r1")
        with pytest.raises(DuplicateRunId):
            store_run(store, "r1")

    def test_hundred_runs_sorted_by_created_at(self, tmp_path):
        store = Store(tmp_path)
        ids = [f"r{i:03d}" for i in range(100)]
        shuffled = ids[:]
        random.Random(5).shuffle(shuffled)
        for i, run_id in enumerate(shuffled):
            store_run(store, run_id, created_at=f"2026-01-01T00:{99 - ids.index(run_id):02d}:00+00:00")
        listed = store.list_runs()
        assert len(listed) == 100
        stamps = [r.created_at for r in listed]
        assert stamps == sorted(stamps)

    def test_unknown_run(self, tmp_path):
        with pytest.raises(UnknownRun):
            Store(tmp_path).get_run("ghost")

    def test_uncommitted_run_invisible(self, tmp_path):
        store = Store(tmp_path)
        pending = store.begin_run("half")
        pending.write_text("trace.jsonl", "{}\n")
        # no commit: crashed mid-run
        assert store.list_runs() == []
        assert not store.has_run("half")
        # a fresh store over the same directory agrees
        restarted = Store(tmp_path)
        assert restarted.list_runs() == []
        with pytest.raises(UnknownRun):
            restarted.get_run("half")

    def test_commit_is_all_or_nothing(self, tmp_path):
        store = Store(tmp_path)
        pending = store.begin_run("full")
        pending.write_text("trace.jsonl", "{}\n")
        pending.commit(make_record("full"))
        assert store.has_run("full")
        assert (store.run_path("full") / "trace.jsonl").is_file()

    def test_bad_run_id(self, tmp_path):
        store = Store(tmp_path)
        with pytest.raises(ValueError):
            store.run_path("../escape")


class TestVerdicts:
    def test_confirm_and_reject(self, tmp_path):
        store = Store(tmp_path)
        store_run(store, "r1")
        store.submit_verdict(Verdict("r1", 3, predicted_label=True, human_label=True))
        store.submit_verdict(Verdict("r1", 4, predicted_label=True, human_label=False))
        export = store.export_feedback(["r1"])
        assert export.false_positives == ({"run_id": "r1", "unit": 4},)
        assert export.false_negatives == ()

    def test_latest_wins_history_retained(self, tmp_path):
        store = Store(tmp_path)
        store_run(store, "r1")
        store.submit_verdict(Verdict("r1", 2, predicted_label=True, human_label=True))
        store.submit_verdict(Verdict("r1", 2, predicted_label=True, human_label=False))
        history = store.verdict_history("r1")
        assert len(history) == 2
        latest = store.latest_verdicts("r1")
        assert latest[2].human_label is False

    def test_unknown_run(self, tmp_path):
        store = Store(tmp_path)
        with pytest.raises(UnknownRun):
            store.submit_verdict(Verdict("ghost", 0, True, True))

    def test_unknown_unit(self, tmp_path):
        store = Store(tmp_path)
        store_run(store, "r1", unit_count=5)
        with pytest.raises(UnknownUnit):
            store.submit_verdict(Verdict("r1", 5, True, True))

    def test_append_only(self, tmp_path):
        store = Store(tmp_path)
        store_run(store, "r1")
        path = store.run_path("r1") / "verdicts.jsonl"
        store.submit_verdict(Verdict("r1", 0, True, True))
        first = path.read_text()
        store.submit_verdict(Verdict("r1", 1, True, False))
        second = path.read_text()
        assert second.startswith(first)


class TestFeedbackExport:
    def test_empty(self, tmp_path):
        store = Store(tmp_path)
        store_run(store, "r1")
        export = store.export_feedback(["r1"])
        assert export.false_positives == ()
        assert export.false_negatives == ()

    def test_counting(self, tmp_path):
        store = Store(tmp_path)
        store_run(store, "r1", unit_count=20)
        for unit in (1, 2, 3):
            store.submit_verdict(Verdict("r1", unit, predicted_label=True, human_label=False))
        for unit in (10, 11):
            store.submit_verdict(Verdict("r1", unit, predicted_label=False, human_label=True))
        export = store.export_feedback(["r1"])
        assert len(export.false_positives) == 3
        assert len(export.false_negatives) == 2

    def test_unverdicted_units_excluded(self, tmp_path):
        store = Store(tmp_path)
        store_run(store, "r1", unit_count=10)
        store.submit_verdict(Verdict("r1", 0, predicted_label=True, human_label=True))
        export = store.export_feedback(["r1"])
        assert export.false_positives == () and export.false_negatives == ()

    def test_randomized_replay_matches_oracle(self, tmp_path):
        rng = random.Random(11)
        store = Store(tmp_path)
        run_ids = [f"r{i}" for i in range(5)]
        for run_id in run_ids:
            store_run(store, run_id, unit_count=30)
        for _ in range(400):
            run_id = rng.choice(run_ids)
            store.submit_verdict(
                Verdict(
                    run_id,
                    rng.randrange(30),
                    predicted_label=rng.random() < 0.5,
                    human_label=rng.random() < 0.5,
                )
            )
        export = store.export_feedback(run_ids)
        fps, fns = oracle_feedback(store, run_ids)
        assert list(export.false_positives) == fps
        assert list(export.false_negatives) == fns

    def test_export_idempotent(self, tmp_path):
        store = Store(tmp_path)
        store_run(store, "r1", unit_count=10)
        store.submit_verdict(Verdict("r1", 1, True, False))
        a = store.export_feedback(["r1"], generated_at="t")
        b = store.export_feedback(["r1"], generated_at="t")
        assert json.dumps(a.to_json()) == json.dumps(b.to_json())

    def test_write_feedback_file(self, tmp_path):
        store = Store(tmp_path)
        store_run(store, "r1")
        export = store.export_feedback(["r1"])
        path = store.write_feedback(export)
        assert path.name.startswith("feedback-")
        payload = json.loads(path.read_text())
        assert payload["schema_version"] == 1

    def test_unknown_run_in_export(self, tmp_path):
        with pytest.raises(UnknownRun):
            Store(tmp_path).export_feedback(["ghost"])


class TestConfigVersions:
    def test_update_and_read_back(self, tmp_path):
        store = Store(tmp_path)
        version = store.update_correction(0.05)
        assert version == 1
        assert store.current_config()["correction"] == pytest.approx(0.05)

    def test_two_updates_increment_twice(self, tmp_path):
        store = Store(tmp_path)
        assert store.update_correction(0.05) == 1
        assert store.update_correction(-0.1) == 2
        history = store.config_history()
        assert [e["version"] for e in history] == [1, 2]
        assert store.current_config()["correction"] == pytest.approx(-0.1)

    def test_prior_snapshots_untouched(self, tmp_path):
        store = Store(tmp_path)
        record = store_run(store, "r1")
        store.update_correction(0.33)
        assert store.get_run("r1").config == dict(record.config)

    def test_non_finite_rejected(self, tmp_path):
        store = Store(tmp_path)
        with pytest.raises(ValueError):
            store.update_correction(float("inf"))
