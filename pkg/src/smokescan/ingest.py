"""Media ingestion: format detection, text loading, and frame sampling.

Only two input formats exist: MP4 video and UTF-8 text. Video is turned
into a timestamped sequence of 224x224 RGB frames sampled once per second.
Decoding is delegated to a small decoder interface so the pipeline (and the
test suite) can run on synthetic frame directories without any codec.
"""

from __future__ import annotations

import json
import math
import re
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Protocol

import numpy as np
from PIL import Image

from .errors import DecodeError, EmptyVideoWarning, UnsupportedFormat

FRAME_SIZE = 224  # target raster edge, pixels


class MediaKind(Enum):
    VIDEO = "video"
    TEXT = "text"


def detect_format(data: bytes) -> MediaKind:
    """Classify raw bytes as MP4 video or UTF-8 text.

    MP4 is recognized by the ASCII box signature ``ftyp`` at byte offset 4;
    anything else that decodes as UTF-8 counts as text, checked in that
    order. Raises UnsupportedFormat when neither applies.
    """
    if not data:
        raise ValueError("detect_format requires non-empty input")
    if len(data) >= 8 and data[4:8] == b"ftyp":
        return MediaKind.VIDEO
    try:
        data.decode("utf-8")
    except UnicodeDecodeError:
        raise UnsupportedFormat(
            "input is neither an MP4 container nor valid UTF-8 text"
        ) from None
    return MediaKind.TEXT


def load_text(data: bytes) -> str:
    """Decode UTF-8 bytes without cleaning; a leading BOM is stripped."""
    text = data.decode("utf-8")
    if text.startswith("﻿"):
        text = text[1:]
    if not text:
        warnings.warn("text input is empty", stacklevel=2)
    return text


@dataclass(frozen=True)
class Frame:
    """One sampled video frame: 224x224 RGB, 8-bit per channel.

    At the default 1 fps the timestamp equals the frame index.
    """

    index: int
    timestamp: float
    pixels: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.pixels.shape != (FRAME_SIZE, FRAME_SIZE, 3):
            raise ValueError(
                f"frame raster must be {FRAME_SIZE}x{FRAME_SIZE}x3, "
                f"got {self.pixels.shape}"
            )
        if self.pixels.dtype != np.uint8:
            raise ValueError("frame raster must be 8-bit per channel")
        self.pixels.setflags(write=False)


@dataclass(frozen=True)
class FrameSequence:
    frames: tuple[Frame, ...]
    source_id: str
    duration: float

    def __post_init__(self) -> None:
        for pos, frame in enumerate(self.frames):
            if frame.index != pos:
                raise ValueError("frame indices must be consecutive from 0")

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)


class VideoDecoder(Protocol):
    """Minimal decoding surface the sampler needs."""

    source_id: str
    duration: float

    def read_frame(self, t: float) -> np.ndarray:
        """Return the decoder-native RGB raster at time ``t`` seconds."""
        ...


def _resize_raster(raster: np.ndarray) -> np.ndarray:
    """Resize an HxWx3 uint8 raster to 224x224 with bilinear interpolation."""
    if raster.ndim != 3 or raster.shape[2] != 3:
        raise DecodeError(f"expected HxWx3 raster, got shape {raster.shape}")
    raster = np.ascontiguousarray(raster, dtype=np.uint8)
    if raster.shape[:2] == (FRAME_SIZE, FRAME_SIZE):
        return raster
    img = Image.fromarray(raster, mode="RGB")
    resized = img.resize((FRAME_SIZE, FRAME_SIZE), Image.BILINEAR)
    return np.asarray(resized, dtype=np.uint8)


def sample_frames(decoder: VideoDecoder, rate: float = 1.0) -> FrameSequence:
    """Sample frames at ``rate`` fps, resized to 224x224.

    Sampling instants are t = k / rate for k in 0..floor(duration * rate) - 1,
    so a 64 s video at 1 fps yields 64 frames with timestamps 0..63. Videos
    shorter than one interval produce an empty sequence and a warning.
    """
    if rate <= 0:
        raise ValueError("sampling rate must be positive")
    count = math.floor(decoder.duration * rate)
    if count <= 0:
        warnings.warn(
            f"video {decoder.source_id!r} shorter than one sampling interval",
            EmptyVideoWarning,
            stacklevel=2,
        )
        return FrameSequence((), decoder.source_id, decoder.duration)
    frames = []
    for k in range(count):
        t = k / rate
        raster = _resize_raster(decoder.read_frame(t))
        frames.append(Frame(index=k, timestamp=t, pixels=raster))
    return FrameSequence(tuple(frames), decoder.source_id, decoder.duration)


_NUMBERED = re.compile(r"(\d+)")


def _numeric_key(path: Path) -> tuple:
    m = _NUMBERED.search(path.stem)
    return (int(m.group(1)) if m else 0, path.name)


class SyntheticDecoder:
    """Decoder over a directory of numbered PNG/PPM rasters plus a manifest.

    Manifest (``manifest.json``) fields: ``duration`` (seconds, required),
    ``source_id`` (defaults to the directory name), and ``smoking_frames``
    (optional list of planted-positive frame indices, used by the mock
    classifier to make fixtures self-labeling).
    """

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        manifest_path = self.directory / "manifest.json"
        if not manifest_path.is_file():
            raise DecodeError(f"no manifest.json in {self.directory}")
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DecodeError(f"manifest.json is not valid JSON: {exc}") from exc
        if "duration" not in manifest:
            raise DecodeError("manifest.json lacks a 'duration' field")
        self.duration = float(manifest["duration"])
        self.source_id = str(manifest.get("source_id", self.directory.name))
        self.smoking_frames = frozenset(
            int(i) for i in manifest.get("smoking_frames", [])
        )
        self._files = sorted(
            (
                p
                for p in self.directory.iterdir()
                if p.suffix.lower() in {".png", ".ppm"}
            ),
            key=_numeric_key,
        )
        if len(self._files) < math.floor(self.duration):
            raise DecodeError(
                f"manifest duration {self.duration} needs "
                f"{math.floor(self.duration)} rasters, found {len(self._files)}"
            )

    def read_frame(self, t: float) -> np.ndarray:
        idx = int(t)  # one raster per second of fixture time
        if idx < 0 or idx >= len(self._files):
            raise DecodeError(f"no raster for t={t}")
        with Image.open(self._files[idx]) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)


class Mp4Decoder:
    """OpenCV-backed decoder for real MP4 files. Requires cv2 at call time."""

    def __init__(self, path: str | Path):
        try:
            import cv2
        except ImportError as exc:  # pragma: no cover - environment dependent
            raise DecodeError(
                "decoding MP4 requires opencv-python; install the 'video' extra"
            ) from exc
        self._cv2 = cv2
        self.path = Path(path)
        self.source_id = self.path.name
        self._cap = cv2.VideoCapture(str(self.path))
        if not self._cap.isOpened():
            raise DecodeError(f"cannot open video: {self.path}")
        fps = self._cap.get(cv2.CAP_PROP_FPS)
        frames = self._cap.get(cv2.CAP_PROP_FRAME_COUNT)
        if fps <= 0 or frames <= 0:
            raise DecodeError(f"cannot determine duration of {self.path}")
        self.duration = frames / fps

    def read_frame(self, t: float) -> np.ndarray:
        self._cap.set(self._cv2.CAP_PROP_POS_MSEC, t * 1000.0)
        ok, bgr = self._cap.read()
        if not ok:
            raise DecodeError(f"decode failed at t={t}s in {self.path}")
        return np.ascontiguousarray(bgr[:, :, ::-1])  # BGR -> RGB

    def close(self) -> None:
        self._cap.release()


def open_decoder(path: str | Path) -> VideoDecoder:
    """Open a fixture directory (SyntheticDecoder) or an MP4 file."""
    p = Path(path)
    if p.is_dir():
        return SyntheticDecoder(p)
    return Mp4Decoder(p)
