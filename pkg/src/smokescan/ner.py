"""Smoking-term tagging in raw text.

Two taggers share one span contract: a deterministic gazetteer matcher
(dictionary terms plus an inflection allowance for agglutinative suffixes)
and a pluggable NER model backend whose output is normalized to sorted,
non-overlapping spans. Scoring is token-level, which is what makes accuracy
meaningful alongside F1.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Protocol, Sequence

import httpx

from .errors import BackendUnavailable, InvalidSpan

LABEL = "SMOKING"
DEFAULT_MAX_SUFFIX = 4
STEM_FLOOR = 4  # below this shared-prefix length, stem matching is off

_WORD = re.compile(r"\w+", re.UNICODE)


def tokenize(text: str) -> list[tuple[int, int, str]]:
    """(start, end, surface) for every word token, in document order."""
    return [(m.start(), m.end(), m.group()) for m in _WORD.finditer(text)]


class SpanSource(Enum):
    GAZETTEER = "gazetteer"
    MODEL = "model"
    HUMAN = "human"


@dataclass(frozen=True)
class AnnotatedSpan:
    """Character-offset labeled region; end is exclusive."""

    start: int
    end: int
    surface: str
    label: str = LABEL
    source: SpanSource = SpanSource.GAZETTEER

    def __post_init__(self) -> None:
        if not 0 <= self.start < self.end:
            raise InvalidSpan(f"bad offsets ({self.start}, {self.end})")
        if len(self.surface) != self.end - self.start:
            raise InvalidSpan("surface length disagrees with offsets")


def validate_spans(spans: Iterable[AnnotatedSpan], text: str) -> None:
    for s in spans:
        if s.end > len(text):
            raise InvalidSpan(f"span ({s.start}, {s.end}) beyond text length {len(text)}")
        if text[s.start:s.end] != s.surface:
            raise InvalidSpan(f"surface {s.surface!r} does not match text at {s.start}")


@dataclass(frozen=True)
class Gazetteer:
    """Lowercase dictionary terms with morphological matching settings.

    A token matches a term when it equals the term, or begins with it and
    the leftover suffix is at most ``max_suffix`` characters (Hungarian case
    endings and similar inflection). Terms ending in a/e also match through
    their lengthened stem variant (a->á, e->é), the regular Hungarian
    low-vowel change before suffixes: "cigarettát" is "cigarettá" + "t", a
    one-character suffix on the term "cigaretta". With ``stem_slack`` > 0, a
    token may also match on a shared stem: the common prefix must reach
    within ``stem_slack`` characters of the term's end (and be at least
    ``STEM_FLOOR`` long). Label projection uses that to catch derived forms
    the generator produces, e.g. a gerund term occurring as its base verb.
    """

    terms: frozenset[str]
    max_suffix: int = DEFAULT_MAX_SUFFIX
    stem_slack: int = 0

    def __post_init__(self) -> None:
        if not self.terms:
            raise ValueError("gazetteer needs at least one term")
        if any(not t for t in self.terms):
            raise ValueError("gazetteer terms must be non-empty")
        if any(t != t.lower() for t in self.terms):
            object.__setattr__(self, "terms", frozenset(t.lower() for t in self.terms))

    @classmethod
    def from_terms(cls, terms: Iterable[str], **settings) -> Gazetteer:
        return cls(frozenset(t.strip().lower() for t in terms if t.strip()), **settings)

    @classmethod
    def from_file(cls, path: str | Path, **settings) -> Gazetteer:
        """Load a UTF-8 dictionary, one term per line, '#' comments."""
        terms = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            term = line.split("#", 1)[0].strip()
            if term:
                terms.append(term)
        return cls.from_terms(terms, **settings)

    @staticmethod
    def _stem_variants(term: str):
        yield term
        if term.endswith("a"):
            yield term[:-1] + "á"
        elif term.endswith("e"):
            yield term[:-1] + "é"

    def _term_matches(self, token: str, term: str) -> bool:
        if token == term:
            return True
        for stem in self._stem_variants(term):
            if token.startswith(stem) and len(token) - len(stem) <= self.max_suffix:
                return True
        if self.stem_slack > 0:
            k = 0
            for a, b in zip(token, term):
                if a != b:
                    break
                k += 1
            if (
                k >= STEM_FLOOR
                and len(term) - k <= self.stem_slack
                and len(token) - k <= self.max_suffix
            ):
                return True
        return False

    def match_token(self, token: str) -> str | None:
        """Longest matching term for a token, or None."""
        token = token.lower()
        best: str | None = None
        for term in self.terms:
            if self._term_matches(token, term) and (best is None or len(term) > len(best)):
                best = term
        return best


def gazetteer_match(text: str, gaz: Gazetteer) -> list[AnnotatedSpan]:
    """Tag whole tokens that match a dictionary term; sorted, non-overlapping."""
    spans = []
    for start, end, surface in tokenize(text):
        if gaz.match_token(surface) is not None:
            spans.append(
                AnnotatedSpan(start, end, surface, source=SpanSource.GAZETTEER)
            )
    return spans


class NerBackend(Protocol):
    backend_id: str

    def tag(self, text: str) -> list[tuple[int, int]]:
        """Raw (start, end) character spans; may be unordered or overlapping."""
        ...


class GazetteerNerBackend:
    """Offline mock that echoes the gazetteer matcher."""

    def __init__(self, gaz: Gazetteer):
        self.gaz = gaz
        self.backend_id = "mock-ner"

    def tag(self, text: str) -> list[tuple[int, int]]:
        return [(s.start, s.end) for s in gazetteer_match(text, self.gaz)]


class RemoteNerBackend:
    """Client for an external NER service.

    Follows the same gateway pattern as the other backends:
    POST {endpoint}/ner with ``{"text": ...}``; response
    ``{"spans": [{"start": int, "end": int}, ...]}``.
    """

    def __init__(self, endpoint: str, timeout: float = 10.0, client: httpx.Client | None = None):
        self.endpoint = endpoint.rstrip("/")
        self.backend_id = f"remote:{self.endpoint}"
        self._client = client or httpx.Client(timeout=timeout)

    def tag(self, text: str) -> list[tuple[int, int]]:
        try:
            resp = self._client.post(f"{self.endpoint}/ner", json={"text": text})
            resp.raise_for_status()
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"ner service: {exc}") from exc
        return [(int(s["start"]), int(s["end"])) for s in resp.json().get("spans", [])]


def ner_tag(text: str, backend: NerBackend) -> list[AnnotatedSpan]:
    """Model spans normalized to the span contract.

    Out-of-range spans are dropped with a warning; overlaps are resolved by
    keeping the longer span, ties by earlier start.
    """
    raw = backend.tag(text)
    candidates = []
    for start, end in raw:
        if not 0 <= start < end <= len(text):
            warnings.warn(f"dropping invalid span ({start}, {end})", stacklevel=2)
            continue
        candidates.append((start, end))
    candidates.sort(key=lambda s: (-(s[1] - s[0]), s[0]))
    kept: list[tuple[int, int]] = []
    for start, end in candidates:
        if all(end <= ks or start >= ke for ks, ke in kept):
            kept.append((start, end))
    kept.sort()
    return [
        AnnotatedSpan(start, end, text[start:end], source=SpanSource.MODEL)
        for start, end in kept
    ]


@dataclass(frozen=True)
class NerReport:
    token_accuracy: float
    precision: float
    recall: float
    f1: float
    counts: dict[str, int]
    flag: str | None = None


def _covered_tokens(spans: Sequence[AnnotatedSpan], tokens: Sequence[tuple[int, int, str]]) -> set[int]:
    covered = set()
    for idx, (ts, te, _) in enumerate(tokens):
        for s in spans:
            if ts < s.end and s.start < te:
                covered.add(idx)
                break
    return covered


def evaluate_ner(
    predicted: Sequence[AnnotatedSpan],
    gold: Sequence[AnnotatedSpan],
    text: str,
) -> NerReport:
    """Token-level scoring: a token is positive iff any span covers it."""
    validate_spans(predicted, text)
    validate_spans(gold, text)
    tokens = tokenize(text)
    pred = _covered_tokens(predicted, tokens)
    truth = _covered_tokens(gold, tokens)
    tp = len(pred & truth)
    fp = len(pred - truth)
    fn = len(truth - pred)
    total = len(tokens)
    tn = total - tp - fp - fn
    accuracy = (tp + tn) / total if total else 1.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    flag = "no-positives" if not truth and not pred else None
    return NerReport(
        token_accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        counts={"tp": tp, "fp": fp, "fn": fn},
        flag=flag,
    )


# span artifact: JSONL, one record per span ----------------------------------

def write_spans_jsonl(fp: IO[str], spans: Iterable[AnnotatedSpan]) -> None:
    for s in spans:
        fp.write(
            json.dumps(
                {
                    "start": s.start,
                    "end": s.end,
                    "surface": s.surface,
                    "label": s.label,
                    "source": s.source.value,
                },
                ensure_ascii=False,
            )
            + "\n"
        )


def read_spans_jsonl(path: str | Path) -> list[AnnotatedSpan]:
    spans = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        spans.append(
            AnnotatedSpan(
                start=int(rec["start"]),
                end=int(rec["end"]),
                surface=str(rec["surface"]),
                label=str(rec.get("label", LABEL)),
                source=SpanSource(rec.get("source", "gazetteer")),
            )
        )
    return spans
