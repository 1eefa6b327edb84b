from __future__ import annotations

import httpx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smokescan.errors import BackendUnavailable, InvalidSpan
from smokescan.ner import (
    AnnotatedSpan,
    Gazetteer,
    GazetteerNerBackend,
    RemoteNerBackend,
    SpanSource,
    evaluate_ner,
    gazetteer_match,
    ner_tag,
    read_spans_jsonl,
    tokenize,
    write_spans_jsonl,
)


def span_for_token(text: str, token_pos: int, source=SpanSource.HUMAN) -> AnnotatedSpan:
    start, end, surface = tokenize(text)[token_pos]
    return AnnotatedSpan(start, end, surface, source=source)


class TestGazetteer:
    def test_exact_token_match(self):
        gaz = Gazetteer.from_terms(["dohányzás"])
        spans = gazetteer_match("A dohányzás káros", gaz)
        assert [(s.start, s.end, s.surface) for s in spans] == [(2, 11, "dohányzás")]

    def test_suffix_allowance(self):
        gaz = Gazetteer.from_terms(["cigaretta"])
        spans = gazetteer_match("egy cigarettát kért", gaz)
        assert [(s.surface) for s in spans] == ["cigarettát"]

    def test_suffix_too_long_rejected(self):
        gaz = Gazetteer.from_terms(["cigaretta"], max_suffix=4)
        assert gazetteer_match("cigarettásdoboz", gaz) == []

    def test_no_terms_matched(self):
        gaz = Gazetteer.from_terms(["szivar"])
        assert gazetteer_match("teljesen ártalmatlan szöveg", gaz) == []

    def test_case_insensitive(self):
        gaz = Gazetteer.from_terms(["smoking"])
        spans = gazetteer_match("Smoking is common. SMOKING too.", gaz)
        assert [s.surface for s in spans] == ["Smoking", "SMOKING"]

    def test_longest_term_wins(self):
        gaz = Gazetteer.from_terms(["dohány", "dohányzás"])
        assert gaz.match_token("dohányzás") == "dohányzás"

    def test_stem_tier_off_by_default(self):
        gaz = Gazetteer.from_terms(["smoking"])
        assert gaz.match_token("smoke") is None

    def test_stem_tier_catches_derived_form(self):
        gaz = Gazetteer.from_terms(["smoking"], stem_slack=3)
        assert gaz.match_token("smoke") == "smoking"
        assert gaz.match_token("smoked") == "smoking"

    def test_stem_tier_needs_long_shared_prefix(self):
        # "city" shares only "ci" with "cigar"; far below the stem floor
        gaz = Gazetteer.from_terms(["cigar"], stem_slack=3)
        assert gaz.match_token("city") is None

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Gazetteer(frozenset())

    def test_from_file(self, tmp_path):
        path = tmp_path / "terms.txt"
        path.write_text("# comment\ndohányzás\nszivar  # inline\n\n", encoding="utf-8")
        gaz = Gazetteer.from_file(path)
        assert gaz.terms == frozenset({"dohányzás", "szivar"})

    def test_spans_sorted_nonoverlapping(self):
        gaz = Gazetteer.from_terms(["füst", "pipa"])
        spans = gazetteer_match("pipa füst pipa füst", gaz)
        assert [s.start for s in spans] == sorted(s.start for s in spans)
        for a, b in zip(spans, spans[1:]):
            assert a.end <= b.start

    def test_idempotent_on_same_text(self):
        gaz = Gazetteer.from_terms(["bagó", "cigi"])
        text = "a cigi meg a bagó megint cigi"
        assert gazetteer_match(text, gaz) == gazetteer_match(text, gaz)


class TestNerTag:
    def test_echo_mock_matches_gazetteer(self):
        gaz = Gazetteer.from_terms(["szivar"])
        text = "egy szivar a polcon"
        tagged = ner_tag(text, GazetteerNerBackend(gaz))
        direct = gazetteer_match(text, gaz)
        assert [(s.start, s.end, s.surface) for s in tagged] == [
            (s.start, s.end, s.surface) for s in direct
        ]
        assert all(s.source is SpanSource.MODEL for s in tagged)

    def test_overlap_keeps_longer(self):
        class Overlapping:
            backend_id = "overlap"

            def tag(self, text):
                return [(2, 11), (2, 20)]

        spans = ner_tag("x" * 30, Overlapping())
        assert [(s.start, s.end) for s in spans] == [(2, 20)]

    def test_out_of_range_dropped_with_warning(self):
        class Broken:
            backend_id = "broken"

            def tag(self, text):
                return [(0, 3), (2, 99)]

        with pytest.warns(UserWarning):
            spans = ner_tag("abcdef", Broken())
        assert [(s.start, s.end) for s in spans] == [(0, 3)]

    def test_remote_backend(self):
        def handler(request):
            assert request.url.path == "/ner"
            return httpx.Response(200, json={"spans": [{"start": 0, "end": 3}]})

        backend = RemoteNerBackend(
            "http://ner.test", client=httpx.Client(transport=httpx.MockTransport(handler))
        )
        spans = ner_tag("ashtray on the table", backend)
        assert [(s.start, s.end) for s in spans] == [(0, 3)]

    def test_remote_unavailable(self):
        backend = RemoteNerBackend(
            "http://ner.test",
            client=httpx.Client(transport=httpx.MockTransport(lambda r: httpx.Response(502))),
        )
        with pytest.raises(BackendUnavailable):
            ner_tag("whatever", backend)


class TestEvaluateNer:
    TEXT = "aa bb cc dohányzás cigaretta szivar dd ee ff gg"  # 10 tokens

    def test_identity_perfect(self):
        gold = [span_for_token(self.TEXT, i) for i in (3, 4, 5)]
        report = evaluate_ner(gold, gold, self.TEXT)
        assert report.token_accuracy == 1.0
        assert report.f1 == 1.0
        assert report.flag is None

    def test_hand_counted_two_thirds(self):
        # gold: 3 positive tokens; predicted: 2 of them plus 1 wrong token
        gold = [span_for_token(self.TEXT, i) for i in (3, 4, 5)]
        predicted = [span_for_token(self.TEXT, i) for i in (3, 4, 6)]
        report = evaluate_ner(predicted, gold, self.TEXT)
        assert report.counts == {"tp": 2, "fp": 1, "fn": 1}
        assert report.precision == pytest.approx(2 / 3)
        assert report.recall == pytest.approx(2 / 3)
        assert report.f1 == pytest.approx(2 / 3)
        assert report.token_accuracy == pytest.approx(8 / 10)

    def test_degenerate_no_positives(self):
        report = evaluate_ner([], [], self.TEXT)
        assert report.token_accuracy == 1.0
        assert report.f1 == 0.0
        assert report.flag == "no-positives"

    def test_invalid_span_rejected(self):
        bad = AnnotatedSpan(0, 2, "aa")
        beyond = AnnotatedSpan(1000, 1002, "xx")
        with pytest.raises(InvalidSpan):
            evaluate_ner([beyond], [bad], self.TEXT)

    def test_surface_mismatch_rejected(self):
        wrong = AnnotatedSpan(0, 2, "zz")
        with pytest.raises(InvalidSpan):
            evaluate_ner([wrong], [], self.TEXT)

    @given(st.sets(st.integers(min_value=0, max_value=9), max_size=10))
    @settings(max_examples=100)
    def test_scoring_symmetry(self, positions):
        spans = [span_for_token(self.TEXT, i) for i in sorted(positions)]
        report = evaluate_ner(spans, spans, self.TEXT)
        assert report.token_accuracy == 1.0
        if positions:
            assert report.f1 == 1.0


class TestSpanJsonl:
    def test_round_trip(self, tmp_path):
        gaz = Gazetteer.from_terms(["dohányzás"])
        spans = gazetteer_match("A dohányzás árt", gaz)
        path = tmp_path / "spans.jsonl"
        with open(path, "w", encoding="utf-8") as fp:
            write_spans_jsonl(fp, spans)
        back = read_spans_jsonl(path)
        assert [(s.start, s.end, s.surface, s.label) for s in back] == [
            (s.start, s.end, s.surface, s.label) for s in spans
        ]
        assert back[0].source is SpanSource.GAZETTEER
