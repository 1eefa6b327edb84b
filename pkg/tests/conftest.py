from __future__ import annotations

import numpy as np
import pytest

from smokescan.fixtures import build_planted_fixture
from smokescan.ingest import FRAME_SIZE, Frame, FrameSequence, SyntheticDecoder

PLANTED = tuple(range(20, 33))  # 13 planted seconds in the 64 s fixture
FIXTURE_SEED = 7


@pytest.fixture(scope="session")
def planted_fixture_dir(tmp_path_factory) -> str:
    """64-frame synthetic video with 13 planted smoking frames, built once."""
    path = tmp_path_factory.mktemp("fixture") / "planted"
    build_planted_fixture(path, n_frames=64, planted=PLANTED, seed=FIXTURE_SEED)
    return str(path)


@pytest.fixture
def planted_decoder(planted_fixture_dir) -> SyntheticDecoder:
    return SyntheticDecoder(planted_fixture_dir)


def make_raster(value: int = 0) -> np.ndarray:
    """Flat 224x224x3 raster; distinct values give distinct embeddings."""
    return np.full((FRAME_SIZE, FRAME_SIZE, 3), value % 256, dtype=np.uint8)


def make_frame(index: int = 0, value: int | None = None) -> Frame:
    return Frame(index=index, timestamp=float(index), pixels=make_raster(value if value is not None else index))


def make_sequence(n: int, source_id: str = "seq") -> FrameSequence:
    return FrameSequence(tuple(make_frame(i) for i in range(n)), source_id, float(n))
