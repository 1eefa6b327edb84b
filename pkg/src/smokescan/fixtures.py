"""Synthetic video fixtures with planted smoking frames.

Mock embeddings carry no semantics, so a fixture cannot rely on content:
instead, candidate rasters are scored against the query under the chosen
mock seed, the highest-similarity rasters become the planted frames and a
tight band around the middle of the distribution becomes the background.
That construction guarantees the cutting line separates planted from
background exactly, and the manifest labels make the mock classifier agree.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

import numpy as np
from PIL import Image

from .embedding import MockEmbeddingBackend, cosine, embed_text
from .ingest import FRAME_SIZE, Frame, SyntheticDecoder

DEFAULT_PLANTED = tuple(range(20, 33))  # 13 consecutive seconds of "smoking"
DEFAULT_CANDIDATES = 1500


def candidate_raster(cid: int) -> np.ndarray:
    """Cheap deterministic 224x224 RGB pattern, distinct per candidate id."""
    x = np.arange(FRAME_SIZE, dtype=np.int64)
    r = (x[None, :] * (cid % 7 + 1) + x[:, None] * 3 + cid) % 256
    g = (x[None, :] * 2 + x[:, None] * (cid % 5 + 1) + cid * 5) % 256
    b = (x[:, None] + cid * 11) % 256
    return np.stack(
        [np.broadcast_to(c, (FRAME_SIZE, FRAME_SIZE)) for c in (r, g, b)], axis=-1
    ).astype(np.uint8)


def build_planted_fixture(
    out_dir: str | Path,
    n_frames: int = 64,
    planted: Iterable[int] = DEFAULT_PLANTED,
    seed: int = 7,
    query: str = "smoking",
    candidates: int = DEFAULT_CANDIDATES,
    source_id: str | None = None,
) -> SyntheticDecoder:
    """Write a frame directory + manifest whose planted frames are exactly
    the ones the mean cutting line selects under ``MockEmbeddingBackend(seed)``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    planted_set = sorted(set(int(i) for i in planted))
    if not planted_set or planted_set[0] < 0 or planted_set[-1] >= n_frames:
        raise ValueError("planted indices must be non-empty and within [0, n_frames)")
    n_background = n_frames - len(planted_set)
    if candidates < n_frames * 4:
        raise ValueError("need a candidate pool several times larger than the video")

    backend = MockEmbeddingBackend(seed)
    query_vec = embed_text(query, backend)
    sims = [
        cosine(backend.embed("image", candidate_raster(cid).tobytes()), query_vec)
        for cid in range(candidates)
    ]
    order = sorted(range(candidates), key=lambda cid: sims[cid])

    top = order[-len(planted_set):]
    mid_center = int(candidates * 0.45)
    half = n_background // 2
    band = order[mid_center - half : mid_center - half + n_background]

    assignments: dict[int, np.ndarray] = {}
    for idx, cid in zip(planted_set, top):
        assignments[idx] = candidate_raster(cid)
    background_iter = iter(band)
    for idx in range(n_frames):
        if idx not in assignments:
            assignments[idx] = candidate_raster(next(background_iter))

    # sanity: the construction must separate planted frames at the mean line
    values = [
        cosine(backend.embed("image", assignments[i].tobytes()), query_vec)
        for i in range(n_frames)
    ]
    mean = sum(values) / len(values)
    selected = [i for i, v in enumerate(values) if v > mean]
    if selected != planted_set:
        raise RuntimeError(
            "fixture construction failed to separate planted frames; "
            "try a larger candidate pool"
        )

    for i in range(n_frames):
        Image.fromarray(assignments[i], mode="RGB").save(out / f"{i:05d}.png")
    manifest = {
        "source_id": source_id or out.name,
        "duration": float(n_frames),
        "smoking_frames": planted_set,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")
    return SyntheticDecoder(out)


def frame_from_raster(raster: np.ndarray, index: int = 0) -> Frame:
    """Wrap a raw 224x224 raster as a Frame (test helper)."""
    return Frame(index=index, timestamp=float(index), pixels=raster)
