"""Image frames and frame sequences.

Frames are 8-bit rasters, grayscale (h, w) or RGB (h, w, 3), immutable
after construction.  Sequences are loaded from directories of PGM (binary
P5, maxval 255) or PNG (8-bit gray/RGB, no alpha) files in lexicographic
filename order.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import kernels
from .errors import (
    BadDimensions,
    DecodeError,
    DimensionMismatch,
    MissingInput,
    NonGrayInput,
)


@dataclass(frozen=True)
class Frame:
    """One 8-bit image; pixels shape (h, w) for gray, (h, w, 3) for RGB."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.ascontiguousarray(np.asarray(self.pixels, dtype=np.uint8))
        if px.ndim == 3 and px.shape[2] == 1:
            px = px[:, :, 0]
        if px.ndim not in (2, 3) or (px.ndim == 3 and px.shape[2] != 3):
            raise BadDimensions(f"expected (h, w) or (h, w, 3), got {px.shape}")
        if px.shape[0] < 2 or px.shape[1] < 2:
            # finite differences need two samples per axis
            raise BadDimensions(f"frame must be at least 2x2, got {px.shape}")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3


@dataclass(frozen=True)
class FrameSequence:
    """Ordered frames with uniform dimensions; implicit frame interval 1."""

    frames: tuple

    def __post_init__(self):
        frames = tuple(self.frames)
        if len(frames) < 2:
            raise MissingInput(f"need at least 2 frames, got {len(frames)}")
        first = frames[0]
        for i, f in enumerate(frames):
            if (f.width, f.height, f.channels) != (
                first.width,
                first.height,
                first.channels,
            ):
                raise DimensionMismatch(
                    f"frame {i} is {f.width}x{f.height}x{f.channels}, "
                    f"expected {first.width}x{first.height}x{first.channels}"
                )
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return len(self.frames)

    def __getitem__(self, i) -> Frame:
        return self.frames[i]

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def channels(self) -> int:
        return self.frames[0].channels


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()

    pos = 0

    def skip_space():
        nonlocal pos
        while pos < len(data):
            c = data[pos : pos + 1]
            if c.isspace():
                pos += 1
            elif c == b"#":
                while pos < len(data) and data[pos : pos + 1] != b"\n":
                    pos += 1
            else:
                break

    def token() -> bytes:
        nonlocal pos
        skip_space()
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise DecodeError(f"{path}: truncated PGM header")
        return data[start:pos]

    if token() != b"P5":
        raise DecodeError(f"{path}: not a binary PGM (P5)")
    try:
        w = int(token())
        h = int(token())
        maxval = int(token())
    except ValueError as e:
        raise DecodeError(f"{path}: bad PGM header") from e
    if maxval != 255:
        raise DecodeError(f"{path}: unsupported maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    raster = data[pos : pos + w * h]
    if len(raster) < w * h:
        raise DecodeError(f"{path}: PGM raster truncated")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w).copy()


def _read_png(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            if im.mode == "L":
                arr = np.asarray(im, dtype=np.uint8)
            elif im.mode == "RGB":
                arr = np.asarray(im, dtype=np.uint8)
            else:
                raise DecodeError(
                    f"{path}: unsupported PNG mode {im.mode} (need 8-bit L or RGB)"
                )
    except DecodeError:
        raise
    except Exception as e:
        raise DecodeError(f"{path}: {e}") from e
    return arr


def load_frame(path) -> Frame:
    """Load a single PGM or PNG file as a Frame."""
    path = Path(path)
    ext = path.suffix.lower()
    if ext == ".pgm":
        return Frame(_read_pgm(path))
    if ext == ".png":
        return Frame(_read_png(path))
    raise DecodeError(f"{path}: unsupported extension {ext!r}")


def save_pgm(frame, path) -> None:
    """Write a grayscale Frame or uint8 array as binary PGM (P5)."""
    px = frame.pixels if isinstance(frame, Frame) else np.asarray(frame, np.uint8)
    if px.ndim != 2:
        raise NonGrayInput("PGM output requires a single-channel image")
    h, w = px.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(np.ascontiguousarray(px).tobytes())


def load_sequence(directory, pattern: str = "*") -> FrameSequence:
    """Load all frames matching `pattern` in `directory`, sorted by filename."""
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingInput(f"{directory}: not a directory")
    paths = sorted(directory.glob(pattern), key=lambda p: p.name)
    paths = [p for p in paths if p.is_file()]
    if len(paths) < 2:
        raise MissingInput(
            f"{directory}: found {len(paths)} frame(s) matching {pattern!r}, need >= 2"
        )
    return FrameSequence(tuple(load_frame(p) for p in paths))


def to_grayscale(f: Frame) -> Frame:
    """BT.601 luma conversion; grayscale input is returned unchanged."""
    if f.channels == 1:
        return f
    rgb = f.pixels.astype(np.float64)
    gray = 0.299 * rgb[:, :, 0] + 0.587 * rgb[:, :, 1] + 0.114 * rgb[:, :, 2]
    gray = np.clip(np.floor(gray + 0.5), 0.0, 255.0)
    return Frame(gray.astype(np.uint8))


def resize_bilinear(f: Frame, w: int, h: int) -> Frame:
    """Resize a frame with edge-clamped bilinear sampling."""
    if w < 2 or h < 2:
        raise BadDimensions(f"target size {w}x{h} too small, need >= 2x2")
    if w == f.width and h == f.height:
        return f
    if f.channels == 1:
        out = kernels.resize_bilinear(f.pixels.astype(np.float64), h, w)
        return Frame(np.clip(np.floor(out + 0.5), 0.0, 255.0).astype(np.uint8))
    chans = []
    for c in range(3):
        out = kernels.resize_bilinear(f.pixels[:, :, c].astype(np.float64), h, w)
        chans.append(np.clip(np.floor(out + 0.5), 0.0, 255.0).astype(np.uint8))
    return Frame(np.stack(chans, axis=2))


def frame_as_float(f: Frame) -> np.ndarray:
    """Grayscale pixel values scaled to [0, 1] float64."""
    g = to_grayscale(f)
    return g.pixels.astype(np.float64) / 255.0


def _require_same_dims(a: Frame, b: Frame) -> None:
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(
            f"{a.width}x{a.height} vs {b.width}x{b.height}"
        )


def require_gray_pair(prev: Frame, nxt: Frame) -> None:
    """Validate a frame pair for flow estimation: same dims, single channel."""
    _require_same_dims(prev, nxt)
    if prev.channels != 1 or nxt.channels != 1:
        raise NonGrayInput("flow estimation needs single-channel frames")
