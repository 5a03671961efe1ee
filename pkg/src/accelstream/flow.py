"""Dense optical flow: variational solver, block-matching oracle, .flo I/O.

The main estimator minimizes the classic brightness-constancy plus
smoothness energy by Jacobi relaxation on a coarse-to-fine pyramid.
Jacobi (not Gauss-Seidel) keeps every sweep order-independent, so a
row-parallel implementation could not change the result.  The
block-matching estimator is an independent exhaustive-search oracle used
to cross-check the solver in tests.

Flow convention: d(x) is the displacement of the content at pixel x in
the earlier frame, i.e. next(x + d(x)) ~ prev(x), units pixels/frame.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import (
    BadConfig,
    BadMagic,
    DimensionMismatch,
    OutOfRange,
    TruncatedFile,
)
from .frames import Frame, require_gray_pair

FLO_MAGIC = 202021.25


@dataclass(frozen=True)
class FlowField:
    """Per-pixel displacement (dx, dy), float32, units pixels/frame."""

    dx: np.ndarray
    dy: np.ndarray

    def __post_init__(self):
        dx = np.ascontiguousarray(np.asarray(self.dx, dtype=np.float32))
        dy = np.ascontiguousarray(np.asarray(self.dy, dtype=np.float32))
        if dx.ndim != 2 or dx.shape != dy.shape:
            raise DimensionMismatch(
                f"dx shape {dx.shape} vs dy shape {dy.shape}"
            )
        if not (np.isfinite(dx).all() and np.isfinite(dy).all()):
            raise OutOfRange("flow field contains non-finite values")
        dx.setflags(write=False)
        dy.setflags(write=False)
        object.__setattr__(self, "dx", dx)
        object.__setattr__(self, "dy", dy)

    @property
    def height(self) -> int:
        return self.dx.shape[0]

    @property
    def width(self) -> int:
        return self.dx.shape[1]


@dataclass(frozen=True)
class HsParams:
    """Solver parameters.

    smoothness weights the regularizer against the data term on the
    native 0..255 intensity scale; iterations counts Jacobi sweeps per
    warp; the pyramid downsamples by 2 per level with bilinear warping
    in between.
    """

    smoothness: float = 15.0
    iterations: int = 100
    pyramid_levels: int = 3
    warp_per_level: int = 1

    def __post_init__(self):
        if not (self.smoothness > 0):
            raise BadConfig(f"smoothness must be > 0, got {self.smoothness}")
        if self.iterations < 1:
            raise BadConfig(f"iterations must be >= 1, got {self.iterations}")
        if self.pyramid_levels < 1:
            raise BadConfig(
                f"pyramid_levels must be >= 1, got {self.pyramid_levels}"
            )
        if self.warp_per_level < 1:
            raise BadConfig(
                f"warp_per_level must be >= 1, got {self.warp_per_level}"
            )


def _grad_x(a: np.ndarray) -> np.ndarray:
    p = np.pad(a, ((0, 0), (1, 1)), mode="edge")
    return (p[:, 2:] - p[:, :-2]) * 0.5


def _grad_y(a: np.ndarray) -> np.ndarray:
    p = np.pad(a, ((1, 1), (0, 0)), mode="edge")
    return (p[2:, :] - p[:-2, :]) * 0.5


def _pyramid(img: np.ndarray, levels: int) -> list:
    pyr = [img]
    for _ in range(1, levels):
        cur = pyr[-1]
        if cur.shape[0] < 4 or cur.shape[1] < 4:
            break  # next level would drop below 2 px per axis
        pyr.append(kernels.box_downsample2(cur))
    return pyr


def estimate_horn_schunck(prev: Frame, nxt: Frame, p: HsParams = HsParams()) -> FlowField:
    """Estimate dense flow from prev to nxt.

    Deterministic: fixed inputs and params give bit-identical output.
    """
    require_gray_pair(prev, nxt)
    # native 8-bit intensity scale: the default smoothness weight is
    # calibrated against squared gradients of 0..255 images
    im0 = prev.pixels.astype(np.float64)
    im1 = nxt.pixels.astype(np.float64)
    pyr0 = _pyramid(im0, p.pyramid_levels)
    pyr1 = _pyramid(im1, p.pyramid_levels)

    u = np.zeros_like(pyr0[-1])
    v = np.zeros_like(pyr0[-1])
    for level in range(len(pyr0) - 1, -1, -1):
        a0 = pyr0[level]
        a1 = pyr1[level]
        h, w = a0.shape
        if u.shape != a0.shape:
            # upsample the coarser estimate and rescale to this level's pixels
            ph, pw = u.shape
            u = kernels.resize_bilinear(u, h, w) * (w / pw)
            v = kernels.resize_bilinear(v, h, w) * (h / ph)
        for _ in range(p.warp_per_level):
            u0 = u
            v0 = v
            warped = kernels.warp_bilinear(a1, u0, v0)
            avg = 0.5 * (a0 + warped)
            ix = _grad_x(avg)
            iy = _grad_y(avg)
            it = warped - a0
            u, v = kernels.hs_sweep(
                ix, iy, it, u0, v0, u0, v0, p.smoothness, p.iterations
            )
    return FlowField(u.astype(np.float32), v.astype(np.float32))


def _candidate_order(radius: int) -> np.ndarray:
    cands = [
        (dy, dx)
        for dy in range(-radius, radius + 1)
        for dx in range(-radius, radius + 1)
    ]
    # tie-break: smallest |d| first, then smallest dy, then smallest dx
    cands.sort(key=lambda c: (c[0] * c[0] + c[1] * c[1], c[0], c[1]))
    return np.asarray(cands, dtype=np.int64)


def estimate_block_matching(
    prev: Frame, nxt: Frame, radius: int = 3, block: int = 5
) -> FlowField:
    """Exhaustive SAD block matching; integer displacements in [-radius, radius]^2.

    Blocks are clamped at image borders.  The candidate visiting order
    realizes the tie-break, first-wins on strict improvement.
    """
    require_gray_pair(prev, nxt)
    if radius < 1:
        raise BadConfig(f"radius must be >= 1, got {radius}")
    if block < 3 or block % 2 == 0:
        raise BadConfig(f"block must be odd and >= 3, got {block}")
    cands = _candidate_order(radius)
    bdx, bdy = kernels.block_match(prev.pixels, nxt.pixels, cands, block)
    return FlowField(bdx.astype(np.float32), bdy.astype(np.float32))


def endpoint_error(est: FlowField, gt: FlowField) -> float:
    """Mean per-pixel Euclidean distance between two flow fields."""
    if (est.width, est.height) != (gt.width, gt.height):
        raise DimensionMismatch(
            f"{est.width}x{est.height} vs {gt.width}x{gt.height}"
        )
    ex = est.dx.astype(np.float64) - gt.dx.astype(np.float64)
    ey = est.dy.astype(np.float64) - gt.dy.astype(np.float64)
    return float(np.mean(np.sqrt(ex * ex + ey * ey)))


def interior_slice(width: int, height: int, border: int):
    """Index slices excluding `border` pixels on every side."""
    if 2 * border >= min(width, height):
        raise BadConfig(f"border {border} leaves no interior for {width}x{height}")
    return slice(border, height - border), slice(border, width - border)


def write_flo(f: FlowField, path) -> None:
    """Write a flow field in the conventional .flo binary layout."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<f", FLO_MAGIC))
        fh.write(struct.pack("<ii", f.width, f.height))
        inter = np.empty((f.height, f.width, 2), dtype="<f4")
        inter[:, :, 0] = f.dx
        inter[:, :, 1] = f.dy
        fh.write(inter.tobytes())


def read_flo(path) -> FlowField:
    """Read a .flo file written by write_flo (bit-exact round trip)."""
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise TruncatedFile(f"{path}: {len(data)} bytes is too short for a header")
    (magic,) = struct.unpack_from("<f", data, 0)
    if magic != FLO_MAGIC:
        raise BadMagic(f"{path}: magic {magic!r} != {FLO_MAGIC!r}")
    w, h = struct.unpack_from("<ii", data, 4)
    if w <= 0 or h <= 0:
        raise TruncatedFile(f"{path}: bad dimensions {w}x{h}")
    need = 12 + 8 * w * h
    if len(data) < need:
        raise TruncatedFile(f"{path}: need {need} bytes, have {len(data)}")
    inter = np.frombuffer(data, dtype="<f4", count=2 * w * h, offset=12)
    inter = inter.reshape(h, w, 2)
    return FlowField(inter[:, :, 0].copy(), inter[:, :, 1].copy())
