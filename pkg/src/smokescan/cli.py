"""Command-line entry points for the whole pipeline."""

from __future__ import annotations

import json
from pathlib import Path

import click

from . import corpus as corpus_mod
from .config import Settings
from .errors import SmokescanError
from .evaluation import evaluate_run
from .filtering import CutLineConfig
from .ingest import MediaKind, detect_format, load_text, open_decoder
from .ner import Gazetteer
from .pipeline import (
    config_snapshot,
    make_backends,
    new_run_id,
    persist_text_run,
    persist_video_run,
    scan_text,
    scan_video,
)
from .store import Store


class _Ctx:
    def __init__(self, settings: Settings, store_root: str, backend: str, seed: int | None):
        if seed is not None:
            settings.seed = seed
        self.settings = settings
        self.backend = backend
        self.store = Store(store_root or settings.store_root)


@click.group()
@click.option("--store", "store_root", default=None, help="Run store directory (default: ./store).")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON settings file.")
@click.option("--backend", type=click.Choice(["mock", "remote"]), default="mock", show_default=True)
@click.option("--seed", type=int, default=None, help="Seed for the deterministic mock backends.")
@click.pass_context
def main(ctx, store_root, config_path, backend, seed):
    """Smoking-content detection over video frames and raw text."""
    settings = Settings.load(config_path)
    ctx.obj = _Ctx(settings, store_root, backend, seed)


def _fail(exc: SmokescanError) -> None:
    raise click.ClickException(f"[{exc.module}] {exc}")


@main.command()
@click.argument("path", type=click.Path())
@click.option("--query", default=None, help="Query term for the similarity filter.")
@click.option("--correction", type=float, default=None, help="Cutting-line correction constant.")
@click.option("--run-id", default=None)
@click.pass_obj
def scan(ctx: _Ctx, path, query, correction, run_id):
    """Scan a video (mp4 or fixture directory) or a UTF-8 text file."""
    p = Path(path)
    if not p.exists():
        raise click.UsageError(f"path does not exist: {path}")
    settings = ctx.settings
    stored_correction = ctx.store.current_config().get("correction")
    cut = CutLineConfig(
        correction=(
            correction
            if correction is not None
            else stored_correction if stored_correction is not None else settings.correction
        ),
        query_term=query or settings.query,
    )
    run_id = run_id or new_run_id()
    try:
        if p.is_dir():
            _scan_video_path(ctx, p, cut, run_id)
        else:
            data = p.read_bytes()
            if not data:
                raise click.UsageError(f"input file is empty: {path}")
            kind = detect_format(data)
            if kind is MediaKind.VIDEO:
                _scan_video_path(ctx, p, cut, run_id)
            else:
                _scan_text_bytes(ctx, p.name, data, cut, run_id)
    except SmokescanError as exc:
        _fail(exc)
    click.echo(f"run {run_id} stored in {ctx.store.root}")


def _scan_video_path(ctx: _Ctx, path: Path, cut: CutLineConfig, run_id: str) -> None:
    decoder = open_decoder(path)
    planted = frozenset(getattr(decoder, "smoking_frames", ()))
    embed_backend, classifier_backend = make_backends(ctx.settings, ctx.backend, planted)
    result = scan_video(decoder, embed_backend, classifier_backend, cut)
    snapshot = config_snapshot(
        ctx.settings,
        cut,
        {"embed_backend": embed_backend.backend_id, "classifier_backend": classifier_backend.backend_id},
    )
    persist_video_run(ctx.store, result, snapshot, run_id=run_id)
    click.echo(f"source: {result.frames.source_id}")
    click.echo(f"frames: {len(result.frames)}  threshold: {result.threshold:.4f}")
    click.echo(
        f"filter: {len(result.filter_selection)}  classifier: {len(result.classifier_selection)}"
        f"  fused: {len(result.fused)}"
    )
    for seg in result.segments:
        click.echo(f"segment: [{seg.start:.0f}s, {seg.end:.0f}s)  {len(seg.frame_indices)}s")
    if not result.segments:
        click.echo("no smoking segments detected")


def _scan_text_bytes(ctx: _Ctx, name: str, data: bytes, cut: CutLineConfig, run_id: str) -> None:
    text = load_text(data)
    gaz = Gazetteer.from_file(ctx.settings.dictionary_path())
    spans = scan_text(text, gaz)
    snapshot = config_snapshot(ctx.settings, cut, {"tagger": "gazetteer"})
    persist_text_run(ctx.store, name, text, spans, snapshot, run_id=run_id)
    click.echo(f"source: {name}")
    click.echo(f"spans: {len(spans)}")
    for s in spans[:20]:
        click.echo(f"  ({s.start},{s.end}) {s.surface}")
    if len(spans) > 20:
        click.echo(f"  ... {len(spans) - 20} more")


@main.command("eval")
@click.argument("run_id")
@click.argument("gold_path", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def eval_cmd(ctx: _Ctx, run_id, gold_path):
    """Score a stored run against gold annotations."""
    try:
        payload = evaluate_run(ctx.store, run_id, gold_path)
    except SmokescanError as exc:
        _fail(exc)
    click.echo(json.dumps(payload, indent=2, ensure_ascii=False))


@main.group()
def corpus():
    """Synthetic corpus tooling: blocks, prompts, ingestion, stats."""


@corpus.command("build")
@click.option("--dict", "dict_path", type=click.Path(exists=True, dir_okay=False), required=False)
@click.option("--block-size", type=int, default=5, show_default=True)
@click.option("--iterations", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--template", default=corpus_mod.DEFAULT_PROMPT_TEMPLATE)
@click.option("--out", type=click.Path(dir_okay=False), default="prompts.jsonl", show_default=True)
@click.pass_obj
def corpus_build(ctx: _Ctx, dict_path, block_size, iterations, seed, template, out):
    """Shuffle the dictionary into disjoint word blocks and render prompts."""
    path = Path(dict_path) if dict_path else ctx.settings.dictionary_path()
    words = [
        line.split("#", 1)[0].strip()
        for line in path.read_text(encoding="utf-8").splitlines()
    ]
    words = [w for w in words if w]
    try:
        plan = corpus_mod.build_blocks(words, block_size=block_size, iterations=iterations, seed=seed)
        with open(out, "w", encoding="utf-8") as fp:
            corpus_mod.write_prompts_jsonl(fp, plan, template)
    except SmokescanError as exc:
        _fail(exc)
    click.echo(f"{len(plan.blocks)} prompts ({iterations} iterations x {len(words) // block_size} blocks) -> {out}")


@corpus.command("generate")
@click.option("--prompts", type=click.Path(exists=True, dir_okay=False), default="prompts.jsonl", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default="generated.jsonl", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def corpus_generate(prompts, out, seed):
    """Fill prompts with the offline template generator (stand-in for an LLM)."""
    n = 0
    with open(out, "w", encoding="utf-8") as fp:
        for line in Path(prompts).read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            block = tuple(json.loads(line)["block"])
            paragraph = corpus_mod.mock_generate_paragraph(block, seed=seed)
            fp.write(json.dumps({"block": list(block), "paragraph": paragraph}, ensure_ascii=False) + "\n")
            n += 1
    click.echo(f"{n} paragraphs -> {out}")


@corpus.command("ingest")
@click.option("--generated", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--template", default=corpus_mod.DEFAULT_PROMPT_TEMPLATE)
@click.option("--out", type=click.Path(dir_okay=False), default="corpus.jsonl", show_default=True)
def corpus_ingest(generated, template, out):
    """Project gold labels onto generated paragraphs."""
    records = []
    uncovered_total = 0
    try:
        for block, paragraph in corpus_mod.read_generated_jsonl(generated):
            spans, uncovered = corpus_mod.project_labels(paragraph, block)
            if uncovered:
                uncovered_total += len(uncovered)
                click.echo(f"warning: no match for {', '.join(uncovered)}", err=True)
            records.append(
                corpus_mod.PromptRecord(
                    block=block,
                    prompt_text=corpus_mod.render_prompt(block, template),
                    paragraph=paragraph,
                    spans=tuple(spans),
                )
            )
        with open(out, "w", encoding="utf-8") as fp:
            corpus_mod.write_corpus_jsonl(fp, records)
    except SmokescanError as exc:
        _fail(exc)
    click.echo(f"{len(records)} annotated paragraphs -> {out} ({uncovered_total} uncovered words)")


@corpus.command("stats")
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False), default="corpus.jsonl", show_default=True)
def corpus_stats_cmd(corpus_path):
    """Paragraph, character, and word counts for an annotated corpus."""
    stats = corpus_mod.corpus_stats(corpus_mod.read_corpus_jsonl(corpus_path))
    click.echo(f"paragraphs: {stats.paragraphs}")
    click.echo(f"characters: {stats.characters}")
    click.echo(f"words: {stats.words}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--static", "static_path", type=click.Path(exists=True, file_okay=False), default=None, help="UI bundle directory.")
@click.option("--token", default=None, help="Shared-secret auth token for /api/*.")
@click.pass_obj
def serve(ctx: _Ctx, host, port, static_path, token):
    """Serve the review API (and the UI bundle, when provided)."""
    from .service import ApiConfig, serve as run_service

    try:
        run_service(
            ctx.store,
            ApiConfig(host=host, port=port, static_path=static_path, auth_token=token or ctx.settings.auth_token),
        )
    except SmokescanError as exc:
        _fail(exc)


@main.command()
@click.option("--runs", default=None, help="Comma-separated run ids (default: all).")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.pass_obj
def export(ctx: _Ctx, runs, out):
    """Export confirmed false positives/negatives as training feedback."""
    ids = [r for r in runs.split(",") if r] if runs else None
    try:
        feedback = ctx.store.export_feedback(ids)
        path = ctx.store.write_feedback(feedback, out)
    except SmokescanError as exc:
        _fail(exc)
    click.echo(
        f"{len(feedback.false_positives)} false positives, "
        f"{len(feedback.false_negatives)} false negatives -> {path}"
    )


@main.command()
@click.argument("run_id")
@click.option("--out", type=click.Path(file_okay=False), default="reports", show_default=True)
@click.pass_obj
def report(ctx: _Ctx, run_id, out):
    """Render trace figures (chronological + sorted) next to the trace data."""
    from .report import render_run_report

    try:
        written = render_run_report(ctx.store, run_id, out)
    except SmokescanError as exc:
        _fail(exc)
    for path in written:
        click.echo(str(path))


@main.command()
@click.argument("out_dir", type=click.Path(file_okay=False))
@click.option("--frames", type=int, default=64, show_default=True)
@click.option("--planted", default="20:33", show_default=True, help="Planted smoking range, start:end (end exclusive).")
@click.option("--seed", type=int, default=None)
@click.pass_obj
def fixture(ctx: _Ctx, out_dir, frames, planted, seed):
    """Build a synthetic planted-positive video fixture for offline demos."""
    from .fixtures import build_planted_fixture

    try:
        start, end = (int(x) for x in planted.split(":"))
    except ValueError:
        raise click.UsageError("--planted must look like 20:33")
    build_planted_fixture(
        out_dir,
        n_frames=frames,
        planted=range(start, end),
        seed=seed if seed is not None else ctx.settings.seed,
    )
    click.echo(f"fixture with {frames} frames ({end - start} planted) -> {out_dir}")


if __name__ == "__main__":
    main()
