"""Run reports: similarity-trace figures rendered next to the JSONL data.

Two views per run: the chronological trace, and the same values in
ascending order where the cutting line is easiest to read. Frames above
the line are highlighted in both.
"""

from __future__ import annotations

import shutil
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .errors import UnknownRun
from .filtering import read_trace_jsonl, sorted_trace
from .store import Store


def _styled_axis(ax, threshold: float):
    ax.axhline(threshold, color="crimson", linewidth=1.2, label=f"cutting line {threshold:.4f}")
    ax.set_ylabel("cosine similarity")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper left", fontsize=8)


def fig_chronological(values, threshold: float, source_id: str = ""):
    fig, ax = plt.subplots(figsize=(8, 3.2), constrained_layout=True)
    xs = range(len(values))
    above = [v > threshold for v in values]
    ax.plot(xs, values, color="steelblue", linewidth=0.9, alpha=0.7)
    ax.scatter(
        [x for x, a in zip(xs, above) if a],
        [v for v, a in zip(values, above) if a],
        s=14, color="darkorange", zorder=3, label="above line",
    )
    _styled_axis(ax, threshold)
    ax.set_xlabel("frame (s)")
    ax.set_title(f"similarity trace, chronological {source_id}".strip())
    return fig

def fig_sorted(values, threshold: float, source_id: str = ""):
    from .filtering import SimilarityTrace

    ordered = sorted_trace(SimilarityTrace(tuple(values), source_id or "trace"))
    ys = [v for _, v in ordered]
    fig, ax = plt.subplots(figsize=(8, 3.2), constrained_layout=True)
    xs = range(len(ys))
    above = [v > threshold for v in ys]
    ax.plot(xs, ys, color="steelblue", linewidth=1.1)
    ax.scatter(
        [x for x, a in zip(xs, above) if a],
        [v for v, a in zip(ys, above) if a],
        s=14, color="darkorange", zorder=3, label="above line",
    )
    _styled_axis(ax, threshold)
    ax.set_xlabel("rank (ascending similarity)")
    ax.set_title(f"similarity trace, sorted {source_id}".strip())
    return fig


def render_run_report(store: Store, run_id: str, out_dir: str | Path) -> list[Path]:
    """Render both trace figures for one run and copy the trace JSONL
    alongside them. Returns the written paths."""
    record = store.get_run(run_id)
    trace_path = store.artifact_path(run_id, "trace")
    if not trace_path.is_file():
        raise UnknownRun(f"run {run_id!r} has no trace artifact (text run?)")
    tf = read_trace_jsonl(trace_path)
    threshold = float(tf.header.get("threshold", 0.0))

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, fig in (
        ("trace-chronological.png", fig_chronological(tf.trace.values, threshold, record.source_id)),
        ("trace-sorted.png", fig_sorted(tf.trace.values, threshold, record.source_id)),
    ):
        path = out / f"{run_id}-{name}"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    copied = out / f"{run_id}-trace.jsonl"
    shutil.copyfile(trace_path, copied)
    written.append(copied)
    return written
