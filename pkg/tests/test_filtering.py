from __future__ import annotations

import io
import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smokescan.embedding import MockEmbeddingBackend
from smokescan.errors import EmptyTrace
from smokescan.filtering import (
    CutLineConfig,
    FrameSelection,
    SimilarityTrace,
    build_trace,
    cutting_line,
    filter_frames,
    read_trace_jsonl,
    sorted_trace,
    write_trace_jsonl,
)

from conftest import make_sequence


def brute_force_selection(values, threshold):
    """Independent oracle: plain scan over all indices."""
    return [i for i in range(len(values)) if values[i] > threshold]


def trace_of(values, source="t") -> SimilarityTrace:
    return SimilarityTrace(tuple(values), source)


sim_values = st.lists(
    st.floats(min_value=-1.0, max_value=1.0, allow_nan=False), min_size=1, max_size=300
)


class TestCuttingLine:
    def test_mean_of_two(self):
        assert cutting_line(trace_of([0.2, 0.4]), CutLineConfig()) == pytest.approx(0.3)

    def test_mean_plus_constant(self):
        cfg = CutLineConfig(correction=0.05)
        assert cutting_line(trace_of([0.2, 0.4]), cfg) == pytest.approx(0.35)

    def test_constant_trace(self):
        assert cutting_line(trace_of([0.3, 0.3, 0.3]), CutLineConfig()) == pytest.approx(0.3)

    def test_empty_trace_raises(self):
        with pytest.raises(EmptyTrace):
            cutting_line(trace_of([]), CutLineConfig())

    def test_correction_must_be_finite(self):
        with pytest.raises(ValueError):
            CutLineConfig(correction=float("nan"))

    def test_multi_word_query_flagged(self):
        assert not CutLineConfig().multi_word_query
        assert CutLineConfig(query_term="smoking a cigar").multi_word_query


class TestFilterFrames:
    def test_strict_inequality(self):
        sel = filter_frames(trace_of([0.1, 0.2, 0.3, 0.6]), 0.3)
        assert sel.indices == (3,)

    def test_constant_trace_at_mean_selects_nothing(self):
        t = trace_of([0.3, 0.3, 0.3])
        thr = cutting_line(t, CutLineConfig())
        assert filter_frames(t, thr).indices == ()

    def test_matches_brute_force_on_random_traces(self):
        rng = random.Random(42)
        for _ in range(1000):
            values = [rng.uniform(-1, 1) for _ in range(rng.randint(1, 120))]
            c = rng.uniform(-0.2, 0.2)
            t = trace_of(values)
            thr = cutting_line(t, CutLineConfig(correction=c))
            assert list(filter_frames(t, thr).indices) == brute_force_selection(values, thr)

    @given(sim_values, st.floats(min_value=-0.5, max_value=0.5, allow_nan=False))
    @settings(max_examples=200)
    def test_property_equals_oracle(self, values, c):
        t = trace_of(values)
        thr = cutting_line(t, CutLineConfig(correction=c))
        assert list(filter_frames(t, thr).indices) == brute_force_selection(values, thr)

    @given(sim_values, st.floats(min_value=-0.3, max_value=0.3), st.floats(min_value=0, max_value=0.3))
    @settings(max_examples=200)
    def test_monotonic_in_correction(self, values, c1, delta):
        t = trace_of(values)
        lo = set(filter_frames(t, cutting_line(t, CutLineConfig(correction=c1))).indices)
        hi = set(filter_frames(t, cutting_line(t, CutLineConfig(correction=c1 + delta))).indices)
        assert hi <= lo

    # dyadic grid keeps every sum exactly representable, so the test sees
    # the decision rule's translation invariance, not float rounding noise
    dyadic = st.integers(min_value=-64, max_value=64).map(lambda k: k / 64)

    @given(st.lists(dyadic, min_size=1, max_size=100), dyadic, dyadic)
    @settings(max_examples=200)
    def test_translation_invariance(self, values, thr, d):
        base = brute_force_selection(values, thr)
        moved = brute_force_selection([v + d for v in values], thr + d)
        assert base == moved

    def test_selection_indices_strictly_increasing(self):
        with pytest.raises(ValueError):
            FrameSelection((3, 3), threshold=0.0)


class TestSortedTrace:
    def test_basic_ordering(self):
        assert sorted_trace(trace_of([0.5, 0.1, 0.3])) == [(1, 0.1), (2, 0.3), (0, 0.5)]

    def test_stable_on_ties(self):
        assert sorted_trace(trace_of([0.2, 0.2, 0.2])) == [(0, 0.2), (1, 0.2), (2, 0.2)]

    @given(sim_values)
    @settings(max_examples=200)
    def test_permutation_preserves_multiset(self, values):
        out = sorted_trace(trace_of(values))
        assert Counter(v for _, v in out) == Counter(values)
        assert sorted(i for i, _ in out) == list(range(len(values)))
        ordered = [v for _, v in out]
        assert ordered == sorted(ordered)


class TestBuildTrace:
    def test_length_matches_frames(self):
        frames = make_sequence(5)
        trace = build_trace(frames, "smoking", MockEmbeddingBackend(seed=7))
        assert len(trace) == 5
        assert all(-1.0 <= v <= 1.0 for v in trace.values)

    def test_identical_frames_identical_values(self):
        from conftest import make_frame

        from smokescan.ingest import FrameSequence

        frames = FrameSequence(
            tuple(make_frame(i, value=9) for i in range(4)),
            "same",
            4.0,
        )
        trace = build_trace(frames, "smoking", MockEmbeddingBackend(seed=7))
        assert len(set(trace.values)) == 1

    def test_empty_sequence_raises(self):
        from smokescan.ingest import FrameSequence

        with pytest.raises(EmptyTrace):
            build_trace(FrameSequence((), "none", 0.0), "smoking", MockEmbeddingBackend(7))

    def test_trace_values_in_range(self):
        assert len(trace_of([1.0, -1.0, 0.0])) == 3
        with pytest.raises(ValueError):
            trace_of([1.5])


class TestTraceJsonl:
    def test_round_trip(self, tmp_path):
        t = trace_of([0.1, 0.5, -0.2], source="vid-1")
        cfg = CutLineConfig(correction=0.05, query_term="smoking")
        thr = cutting_line(t, cfg)
        buf = io.StringIO()
        write_trace_jsonl(buf, t, thr, cfg)
        path = tmp_path / "trace.jsonl"
        path.write_text(buf.getvalue(), encoding="utf-8")
        tf = read_trace_jsonl(path)
        assert tf.trace.values == t.values
        assert tf.header["threshold"] == pytest.approx(thr)
        assert tf.header["query"] == "smoking"
        assert tf.header["correction"] == pytest.approx(0.05)
        assert tf.timestamps == (0.0, 1.0, 2.0)
