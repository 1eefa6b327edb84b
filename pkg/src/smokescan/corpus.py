"""Synthetic annotated corpus generation.

A dictionary of smoking terms is shuffled and partitioned into disjoint
word blocks, each block is rendered into a generation prompt, and gold
labels are projected back onto the generated paragraphs by locating the
block's own words. Generation itself is an external step (prompts out,
paragraphs in); a template mock makes the whole loop runnable offline.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

from .errors import BadTemplate, DictionaryTooSmall
from .ner import AnnotatedSpan, Gazetteer, gazetteer_match, tokenize

DEFAULT_BLOCK_SIZE = 5
DEFAULT_ITERATIONS = 10
PLACEHOLDER = "{words}"
DEFAULT_PROMPT_TEMPLATE = (
    "Generate a short text about smoking. "
    "The text strictly contains the following words in the different sentences: "
    + PLACEHOLDER
)
# derivational slack used when projecting labels: catches generated forms
# whose ending differs from the dictionary term (gerund vs base form)
PROJECTION_STEM_SLACK = 3


@dataclass(frozen=True)
class BlockPlan:
    blocks: tuple[tuple[str, ...], ...]
    iterations: int
    block_size: int
    seed: int


def build_blocks(
    dictionary: Sequence[str],
    block_size: int = DEFAULT_BLOCK_SIZE,
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
) -> BlockPlan:
    """Shuffle-and-partition the dictionary ``iterations`` times.

    Each iteration shuffles the full word list with the seeded generator and
    splits it into floor(n / block_size) full blocks; leftover words are
    dropped for that iteration. Blocks within one iteration are pairwise
    disjoint, and across the plan every word appears at most ``iterations``
    times. 43 words at size 5 over 10 iterations give 80 blocks.
    """
    words = list(dict.fromkeys(dictionary))  # dedupe, keep order
    if block_size < 1:
        raise ValueError("block size must be >= 1")
    if len(words) < block_size:
        raise DictionaryTooSmall(
            f"need at least {block_size} distinct words, got {len(words)}"
        )
    rng = random.Random(seed)
    per_iteration = len(words) // block_size
    blocks: list[tuple[str, ...]] = []
    for _ in range(iterations):
        shuffled = words[:]
        rng.shuffle(shuffled)
        for b in range(per_iteration):
            blocks.append(tuple(shuffled[b * block_size:(b + 1) * block_size]))
    return BlockPlan(tuple(blocks), iterations=iterations, block_size=block_size, seed=seed)


def render_prompt(block: Sequence[str], template: str = DEFAULT_PROMPT_TEMPLATE) -> str:
    """Substitute the comma-joined block into the template's placeholder."""
    if template.count(PLACEHOLDER) != 1:
        raise BadTemplate(f"template must contain exactly one {PLACEHOLDER}")
    return template.replace(PLACEHOLDER, ", ".join(block))


def project_labels(
    paragraph: str,
    block: Sequence[str],
    max_suffix: int = 4,
    stem_slack: int = PROJECTION_STEM_SLACK,
) -> tuple[list[AnnotatedSpan], list[str]]:
    """Locate the block's words in a generated paragraph as gold spans.

    Returns (spans, uncovered) where ``uncovered`` lists block words with no
    match at all; generation does not guarantee every word appears.
    """
    if not paragraph:
        raise ValueError("cannot project labels onto an empty paragraph")
    gaz = Gazetteer.from_terms(block, max_suffix=max_suffix, stem_slack=stem_slack)
    spans = gazetteer_match(paragraph, gaz)
    tokens = [t for _, _, t in tokenize(paragraph)]
    uncovered = []
    for word in block:
        single = Gazetteer.from_terms([word], max_suffix=max_suffix, stem_slack=stem_slack)
        if not any(single.match_token(tok) for tok in tokens):
            uncovered.append(word)
    return spans, uncovered


@dataclass(frozen=True)
class PromptRecord:
    block: tuple[str, ...]
    prompt_text: str
    paragraph: str = ""
    spans: tuple[AnnotatedSpan, ...] = field(default=())


@dataclass(frozen=True)
class CorpusStats:
    paragraphs: int
    characters: int
    words: int


def corpus_stats(records: Iterable[PromptRecord]) -> CorpusStats:
    paragraphs = 0
    characters = 0
    words = 0
    for rec in records:
        paragraphs += 1
        characters += len(rec.paragraph)
        words += len(tokenize(rec.paragraph))
    return CorpusStats(paragraphs=paragraphs, characters=characters, words=words)


# offline paragraph generator -------------------------------------------------

_STOCK_SENTENCES = (
    "Many people mention {w} when the topic comes up.",
    "The report devotes an entire section to {w} and its effects.",
    "Nobody at the meeting wanted to talk about {w} openly.",
    "Researchers keep measuring how often {w} appears in daily life.",
    "Local papers ran another story on {w} last week.",
)
_MOCK_SUFFIXES = ("", "", "t", "ot", "ban", "nak")  # all within the suffix allowance


def mock_generate_paragraph(block: Sequence[str], seed: int = 0) -> str:
    """Deterministic stand-in for a generative model.

    Embeds every block word into a stock sentence, occasionally with a short
    inflection suffix, so projection and matching are exercised end to end.
    """
    rng = random.Random(f"{seed}:{','.join(block)}")
    sentences = []
    for word in block:
        template = rng.choice(_STOCK_SENTENCES)
        inflected = word + rng.choice(_MOCK_SUFFIXES)
        sentences.append(template.format(w=inflected))
    return " ".join(sentences)


# corpus files: prompts, generated paragraphs, annotated records --------------

def write_prompts_jsonl(fp: IO[str], plan: BlockPlan, template: str = DEFAULT_PROMPT_TEMPLATE) -> None:
    for block in plan.blocks:
        fp.write(
            json.dumps(
                {"block": list(block), "prompt": render_prompt(block, template)},
                ensure_ascii=False,
            )
            + "\n"
        )


def read_generated_jsonl(path: str | Path) -> list[tuple[tuple[str, ...], str]]:
    """Read generated paragraphs: one {"block": [...], "paragraph": str} per line."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        out.append((tuple(rec["block"]), str(rec["paragraph"])))
    return out


def write_corpus_jsonl(fp: IO[str], records: Iterable[PromptRecord]) -> None:
    for rec in records:
        fp.write(
            json.dumps(
                {
                    "block": list(rec.block),
                    "prompt": rec.prompt_text,
                    "paragraph": rec.paragraph,
                    "spans": [
                        {"start": s.start, "end": s.end, "surface": s.surface, "label": s.label}
                        for s in rec.spans
                    ],
                },
                ensure_ascii=False,
            )
            + "\n"
        )


def read_corpus_jsonl(path: str | Path) -> list[PromptRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        spans = tuple(
            AnnotatedSpan(int(s["start"]), int(s["end"]), str(s["surface"]))
            for s in rec.get("spans", [])
        )
        records.append(
            PromptRecord(
                block=tuple(rec["block"]),
                prompt_text=str(rec.get("prompt", "")),
                paragraph=str(rec.get("paragraph", "")),
                spans=spans,
            )
        )
    return records
