"""Motion images: quantized flow renderings, acceleration fields, stacks.

A motion image is one flow or acceleration component mapped to 8 bits
with zero motion at gray level 128.  Acceleration comes in two modes:
spatial differences adjacent pixels within one flow field; temporal
differences consecutive flow fields.  Stacks interleave x/y motion
images over L consecutive time steps into a 2L-channel volume.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadBound,
    DecodeError,
    DimensionMismatch,
    MissingInput,
    OutOfRange,
)
from .flow import FlowField
from .frames import _read_pgm, save_pgm

DEFAULT_BOUND_FLOW = 20.0
DEFAULT_BOUND_ACCEL = 8.0
DEFAULT_STACK_LENGTH = 10


@dataclass(frozen=True)
class AccelField:
    """Per-pixel acceleration (ax, ay), float32; mode spatial or temporal."""

    ax: np.ndarray
    ay: np.ndarray
    mode: str

    def __post_init__(self):
        ax = np.ascontiguousarray(np.asarray(self.ax, dtype=np.float32))
        ay = np.ascontiguousarray(np.asarray(self.ay, dtype=np.float32))
        if ax.ndim != 2 or ax.shape != ay.shape:
            raise DimensionMismatch(f"ax shape {ax.shape} vs ay shape {ay.shape}")
        if not (np.isfinite(ax).all() and np.isfinite(ay).all()):
            raise OutOfRange("acceleration field contains non-finite values")
        if self.mode not in ("spatial", "temporal"):
            raise OutOfRange(f"unknown acceleration mode {self.mode!r}")
        ax.setflags(write=False)
        ay.setflags(write=False)
        object.__setattr__(self, "ax", ax)
        object.__setattr__(self, "ay", ay)

    @property
    def height(self) -> int:
        return self.ax.shape[0]

    @property
    def width(self) -> int:
        return self.ax.shape[1]


@dataclass(frozen=True)
class MotionImage:
    """8-bit rendering of one motion component plus its dequantization bound."""

    pixels: np.ndarray
    bound: float

    def __post_init__(self):
        px = np.ascontiguousarray(np.asarray(self.pixels, dtype=np.uint8))
        if px.ndim != 2:
            raise DimensionMismatch(f"expected 2-D pixels, got shape {px.shape}")
        if not (self.bound > 0):
            raise BadBound(f"bound must be > 0, got {self.bound}")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)
        object.__setattr__(self, "bound", float(self.bound))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class StackedVolume:
    """2L interleaved motion-image channels (x1, y1, ..., xL, yL)."""

    channels: np.ndarray
    bounds: tuple

    def __post_init__(self):
        ch = np.ascontiguousarray(np.asarray(self.channels, dtype=np.uint8))
        if ch.ndim != 3 or ch.shape[0] % 2 != 0 or ch.shape[0] == 0:
            raise DimensionMismatch(
                f"expected (2L, h, w) channels, got shape {ch.shape}"
            )
        bounds = tuple(float(b) for b in self.bounds)
        if len(bounds) != ch.shape[0]:
            raise DimensionMismatch(
                f"{len(bounds)} bounds for {ch.shape[0]} channels"
            )
        for b in bounds:
            if not (b > 0):
                raise BadBound(f"bound must be > 0, got {b}")
        ch.setflags(write=False)
        object.__setattr__(self, "channels", ch)
        object.__setattr__(self, "bounds", bounds)

    @property
    def stack_length(self) -> int:
        return self.channels.shape[0] // 2

    @property
    def height(self) -> int:
        return self.channels.shape[1]

    @property
    def width(self) -> int:
        return self.channels.shape[2]


def acceleration_spatial(f: FlowField) -> AccelField:
    """Difference each flow component along its own axis.

    ax(x, y) = dx(x+1, y) - dx(x, y) and ay(x, y) = dy(x, y+1) - dy(x, y);
    the trailing column of ax and trailing row of ay are 0 (clamp padding
    makes the out-of-range neighbour equal the edge value).
    """
    dx = f.dx.astype(np.float64)
    dy = f.dy.astype(np.float64)
    ax = np.zeros_like(dx)
    ay = np.zeros_like(dy)
    ax[:, :-1] = dx[:, 1:] - dx[:, :-1]
    ay[:-1, :] = dy[1:, :] - dy[:-1, :]
    return AccelField(ax.astype(np.float32), ay.astype(np.float32), "spatial")


def acceleration_temporal(f_t: FlowField, f_t1: FlowField) -> AccelField:
    """Difference consecutive flow fields: a = d_{t+1} - d_t."""
    if (f_t.width, f_t.height) != (f_t1.width, f_t1.height):
        raise DimensionMismatch(
            f"{f_t.width}x{f_t.height} vs {f_t1.width}x{f_t1.height}"
        )
    ax = f_t1.dx.astype(np.float64) - f_t.dx.astype(np.float64)
    ay = f_t1.dy.astype(np.float64) - f_t.dy.astype(np.float64)
    return AccelField(ax.astype(np.float32), ay.astype(np.float32), "temporal")


def quantize(values, bound: float) -> np.ndarray:
    """Map real values to 8 bits: clamp(round(128 + 127 v / bound), 0, 255).

    Monotone in v; v = 0 maps to 128; +/-bound map to 255 / 1.
    """
    if not (bound > 0):
        raise BadBound(f"bound must be > 0, got {bound}")
    v = np.asarray(values, dtype=np.float64)
    code = np.floor(128.0 + 127.0 * v / bound + 0.5)
    return np.clip(code, 0.0, 255.0).astype(np.uint8)


def dequantize(img: MotionImage) -> np.ndarray:
    """Invert quantize up to its rounding: v = (pixel - 128) bound / 127."""
    return (img.pixels.astype(np.float64) - 128.0) * (img.bound / 127.0)


def flow_to_images(f: FlowField, bound: float = DEFAULT_BOUND_FLOW):
    """Render a flow field as an (x-image, y-image) pair."""
    if not (bound > 0):
        raise BadBound(f"bound must be > 0, got {bound}")
    return (
        MotionImage(quantize(f.dx, bound), bound),
        MotionImage(quantize(f.dy, bound), bound),
    )


def accel_to_images(a: AccelField, bound: float = DEFAULT_BOUND_ACCEL):
    """Render an acceleration field as an (x-image, y-image) pair."""
    if not (bound > 0):
        raise BadBound(f"bound must be > 0, got {bound}")
    return (
        MotionImage(quantize(a.ax, bound), bound),
        MotionImage(quantize(a.ay, bound), bound),
    )


def build_stack(images, start: int, stack_length: int = DEFAULT_STACK_LENGTH) -> StackedVolume:
    """Stack L consecutive (x, y) motion-image pairs from `start`.

    Channel 2k is the x-image and channel 2k+1 the y-image of pair
    start + k.
    """
    images = list(images)
    if stack_length < 1:
        raise OutOfRange(f"stack length must be >= 1, got {stack_length}")
    if start < 0 or start + stack_length > len(images):
        raise OutOfRange(
            f"stack [{start}, {start + stack_length}) out of range for "
            f"{len(images)} pairs"
        )
    first_x = images[start][0]
    chans = []
    bounds = []
    for k in range(stack_length):
        xi, yi = images[start + k]
        for img in (xi, yi):
            if (img.width, img.height) != (first_x.width, first_x.height):
                raise DimensionMismatch(
                    f"pair {start + k} is {img.width}x{img.height}, "
                    f"expected {first_x.width}x{first_x.height}"
                )
            chans.append(img.pixels)
            bounds.append(img.bound)
    return StackedVolume(np.stack(chans, axis=0), tuple(bounds))


# ---------------------------------------------------------------------------
# persistence: PGM plus a "bound=<decimal>" sidecar


def write_motion_image(img: MotionImage, path) -> None:
    """Write <path> as PGM and the bound to the matching .meta sidecar."""
    path = Path(path)
    save_pgm(img.pixels, path)
    path.with_suffix(".meta").write_text(f"bound={img.bound!r}\n")


def read_motion_image(path) -> MotionImage:
    path = Path(path)
    meta = path.with_suffix(".meta")
    if not meta.is_file():
        raise MissingInput(f"{meta}: sidecar not found")
    text = meta.read_text().strip()
    if not text.startswith("bound="):
        raise DecodeError(f"{meta}: expected 'bound=<decimal>', got {text!r}")
    try:
        bound = float(text[len("bound="):])
    except ValueError as e:
        raise DecodeError(f"{meta}: bad bound value") from e
    return MotionImage(_read_pgm(path), bound)


def write_stack(vol: StackedVolume, directory) -> None:
    """Persist a stack as 2L PGM channel files plus an ordering manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = []
    for c in range(vol.channels.shape[0]):
        name = f"ch_{c:02d}.pgm"
        write_motion_image(
            MotionImage(vol.channels[c], vol.bounds[c]), directory / name
        )
        axis = "x" if c % 2 == 0 else "y"
        lines.append(f"{name},{axis}")
    (directory / "stack.txt").write_text("\n".join(lines) + "\n")


def read_stack(directory) -> StackedVolume:
    directory = Path(directory)
    manifest = directory / "stack.txt"
    if not manifest.is_file():
        raise MissingInput(f"{manifest}: not found")
    chans = []
    bounds = []
    for line in manifest.read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        name = line.split(",")[0]
        img = read_motion_image(directory / name)
        chans.append(img.pixels)
        bounds.append(img.bound)
    if not chans:
        raise MissingInput(f"{manifest}: empty manifest")
    return StackedVolume(np.stack(chans, axis=0), tuple(bounds))
