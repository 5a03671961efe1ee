"""Synthetic sequences with analytic ground-truth motion.

A video renders a continuous master texture translated by the cumulative
displacement of a constant-acceleration motion, so the true flow at
frame pair t is exactly v0 + a*t and the true (temporal) acceleration is
exactly a.  The master is rendered at 4x resolution and frames are
produced by bilinear translation plus 4x4 box downsampling, keeping
subpixel motion faithful.

The benchmark mirrors a small four-action video dataset: 4 classes x 25
videos, 15 train / 10 test each.  Classes pair constant-velocity and
accelerating variants of the same two directions, so velocity alone
cannot separate them but acceleration can.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import BadSpec
from .flow import FlowField, write_flo
from .frames import Frame, FrameSequence, save_pgm
from .motion import AccelField
from .seeding import BENCH_STREAM, SYNTH_STREAM, derive_rng

PATTERNS = ("random-texture", "checkerboard", "gaussian-blobs")
SUPERSAMPLE = 4

BENCH_CLASSES = 4
BENCH_PER_CLASS = 25
BENCH_TRAIN_PER_CLASS = 15


@dataclass(frozen=True)
class MotionSpec:
    """One video's recipe: pattern, initial velocity, acceleration, noise."""

    pattern: str
    v0: tuple
    a: tuple
    n_frames: int = 12
    width: int = 64
    height: int = 64
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise BadSpec(f"unknown pattern {self.pattern!r}")
        v0 = (float(self.v0[0]), float(self.v0[1]))
        a = (float(self.a[0]), float(self.a[1]))
        object.__setattr__(self, "v0", v0)
        object.__setattr__(self, "a", a)
        if self.n_frames < 2:
            raise BadSpec(f"need at least 2 frames, got {self.n_frames}")
        if self.width < 8 or self.height < 8:
            raise BadSpec(f"size {self.width}x{self.height} too small, need >= 8")
        if self.noise_sigma < 0:
            raise BadSpec(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        mx, my = self.max_displacement()
        if mx > self.width / 4 or my > self.height / 4:
            raise BadSpec(
                f"cumulative displacement ({mx:.6g}, {my:.6g}) px exceeds "
                f"({self.width / 4:.6g}, {self.height / 4:.6g}); "
                "content would exit the frame"
            )

    def displacement_at(self, t: int) -> tuple:
        """Cumulative displacement before frame t: t*v0 + a*t(t-1)/2."""
        half = t * (t - 1) / 2.0
        return (t * self.v0[0] + half * self.a[0],
                t * self.v0[1] + half * self.a[1])

    def max_displacement(self) -> tuple:
        xs = []
        ys = []
        for t in range(self.n_frames):
            sx, sy = self.displacement_at(t)
            xs.append(abs(sx))
            ys.append(abs(sy))
        return max(xs), max(ys)


@dataclass(frozen=True)
class GroundTruth:
    """Analytic flow per frame pair and temporal acceleration per pair of pairs."""

    flows: tuple
    accels: tuple
    v0: tuple
    a: tuple


# ---------------------------------------------------------------------------
# pattern rendering on the 4x master grid


def _master_dims(spec: MotionSpec):
    mx, my = spec.max_displacement()
    margin_x = int(math.ceil(mx)) + 2
    margin_y = int(math.ceil(my)) + 2
    unit_w = spec.width + 2 * margin_x
    unit_h = spec.height + 2 * margin_y
    return margin_x, margin_y, unit_w, unit_h


def _unit_coords(unit_w: int, unit_h: int, margin_x: int, margin_y: int):
    m4w = SUPERSAMPLE * unit_w
    m4h = SUPERSAMPLE * unit_h
    ux = np.arange(m4w, dtype=np.float64) / SUPERSAMPLE - margin_x
    uy = np.arange(m4h, dtype=np.float64) / SUPERSAMPLE - margin_y
    return ux, uy


def _render_random_texture(rng, unit_w, unit_h, m4h, m4w):
    # two octaves of bilinear value noise; cells stay resolvable after the
    # flow solver's coarse-to-fine downsampling, so the texture never
    # aliases into false matches
    tex = np.zeros((m4h, m4w), dtype=np.float64)
    for cell, weight in ((16.0, 0.6), (8.0, 0.4)):
        lat_w = max(2, int(math.ceil(unit_w / cell)))
        lat_h = max(2, int(math.ceil(unit_h / cell)))
        lattice = rng.random((lat_h, lat_w))
        tex += weight * kernels.resize_bilinear(lattice, m4h, m4w)
    lo = tex.min()
    hi = tex.max()
    if hi > lo:
        tex = (tex - lo) / (hi - lo)
    return 255.0 * tex


def _render_checkerboard(rng, ux, uy, cell: float = 16.0):
    px, py = rng.uniform(0.0, cell, size=2)
    cx = np.floor((ux + px) / cell).astype(np.int64)[None, :]
    cy = np.floor((uy + py) / cell).astype(np.int64)[:, None]
    board = np.where((cx + cy) % 2 == 0, 1.0, 0.0)
    # light value-noise overlay; pure flat cells give the flow solver no
    # gradient to hold on to away from the cell borders
    m4h, m4w = board.shape
    lat_w = max(2, int(math.ceil(m4w / (SUPERSAMPLE * 8.0))))
    lat_h = max(2, int(math.ceil(m4h / (SUPERSAMPLE * 8.0))))
    noise = kernels.resize_bilinear(rng.random((lat_h, lat_w)), m4h, m4w)
    return 255.0 * (0.75 * board + 0.25 * noise)


def _render_blobs(rng, ux, uy, n_blobs: int = 40):
    m4h = uy.shape[0]
    m4w = ux.shape[0]
    acc = np.zeros((m4h, m4w), dtype=np.float64)
    x_lo = ux[0]
    y_lo = uy[0]
    for _ in range(n_blobs):
        cx = rng.uniform(ux[0], ux[-1])
        cy = rng.uniform(uy[0], uy[-1])
        sigma = rng.uniform(2.0, 6.0)
        amp = rng.uniform(0.5, 1.0)
        # evaluate only inside a 4-sigma bounding box
        j0 = max(0, int((cx - 4 * sigma - x_lo) * SUPERSAMPLE))
        j1 = min(m4w, int((cx + 4 * sigma - x_lo) * SUPERSAMPLE) + 1)
        i0 = max(0, int((cy - 4 * sigma - y_lo) * SUPERSAMPLE))
        i1 = min(m4h, int((cy + 4 * sigma - y_lo) * SUPERSAMPLE) + 1)
        if j0 >= j1 or i0 >= i1:
            continue
        gx = ux[j0:j1] - cx
        gy = uy[i0:i1] - cy
        d2 = gy[:, None] ** 2 + gx[None, :] ** 2
        acc[i0:i1, j0:j1] += amp * np.exp(-d2 / (2.0 * sigma * sigma))
    hi = acc.max()
    if hi > 0:
        acc = acc / hi
    return 255.0 * acc


def _render_master(spec: MotionSpec, rng) -> np.ndarray:
    margin_x, margin_y, unit_w, unit_h = _master_dims(spec)
    ux, uy = _unit_coords(unit_w, unit_h, margin_x, margin_y)
    m4h = uy.shape[0]
    m4w = ux.shape[0]
    if spec.pattern == "random-texture":
        return _render_random_texture(rng, unit_w, unit_h, m4h, m4w)
    if spec.pattern == "checkerboard":
        return _render_checkerboard(rng, ux, uy)
    return _render_blobs(rng, ux, uy)


# ---------------------------------------------------------------------------
# generation


def generate(spec: MotionSpec):
    """Render (FrameSequence, GroundTruth) for a motion spec, deterministically."""
    rng = derive_rng(SYNTH_STREAM, spec.seed)
    margin_x, margin_y, _, _ = _master_dims(spec)
    master = _render_master(spec, rng)

    frames = []
    for t in range(spec.n_frames):
        sx, sy = spec.displacement_at(t)
        tx = SUPERSAMPLE * (margin_x - sx)
        ty = SUPERSAMPLE * (margin_y - sy)
        out4 = kernels.translate_bilinear(
            master, tx, ty, SUPERSAMPLE * spec.height, SUPERSAMPLE * spec.width
        )
        img = kernels.box_downsample(out4, SUPERSAMPLE)
        if spec.noise_sigma > 0:
            img = img + rng.normal(0.0, spec.noise_sigma, size=img.shape)
        frames.append(Frame(np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)))

    shape = (spec.height, spec.width)
    flows = []
    for t in range(spec.n_frames - 1):
        vx = spec.v0[0] + spec.a[0] * t
        vy = spec.v0[1] + spec.a[1] * t
        flows.append(FlowField(
            np.full(shape, vx, dtype=np.float32),
            np.full(shape, vy, dtype=np.float32),
        ))
    accels = tuple(
        AccelField(
            np.full(shape, spec.a[0], dtype=np.float32),
            np.full(shape, spec.a[1], dtype=np.float32),
            "temporal",
        )
        for _ in range(spec.n_frames - 2)
    )
    gt = GroundTruth(flows=tuple(flows), accels=accels, v0=spec.v0, a=spec.a)
    return FrameSequence(tuple(frames)), gt


# ---------------------------------------------------------------------------
# benchmark assembly


@dataclass(frozen=True)
class BenchmarkVideo:
    video_id: str
    label: int
    split: str  # train | test
    spec: MotionSpec


CLASS_NAMES = (
    "right-constant",
    "down-constant",
    "right-accelerating",
    "down-accelerating",
)


def make_benchmark(seed: int, n_frames: int = 12, width: int = 192,
                   height: int = 192) -> list:
    """4 classes x 25 videos with jittered motion; first 15 per class train.

    Classes: 0 rightward constant velocity, 1 downward constant velocity,
    2 rightward accelerating, 3 downward accelerating.
    """
    rng = derive_rng(BENCH_STREAM, seed)
    videos = []
    idx = 0
    for label in range(BENCH_CLASSES):
        for j in range(BENCH_PER_CLASS):
            # fixed draw count per video keeps the stream layout stable
            v0_mag = rng.uniform(0.8, 1.5)
            a_mag = rng.uniform(0.2, 0.5)
            noise = float(rng.choice(np.asarray([0.0, 2.0])))
            video_seed = int(rng.integers(0, 2**31))
            if label in (0, 2):
                v0 = (v0_mag, 0.0)
                acc = (a_mag, 0.0) if label == 2 else (0.0, 0.0)
            else:
                v0 = (0.0, v0_mag)
                acc = (0.0, a_mag) if label == 3 else (0.0, 0.0)
            spec = MotionSpec(
                pattern=PATTERNS[idx % len(PATTERNS)],
                v0=v0,
                a=acc,
                n_frames=n_frames,
                width=width,
                height=height,
                noise_sigma=noise,
                seed=video_seed,
            )
            split = "train" if j < BENCH_TRAIN_PER_CLASS else "test"
            videos.append(
                BenchmarkVideo(f"v{idx:03d}", label, split, spec)
            )
            idx += 1
    return videos


def _format_vec(v) -> str:
    return f"{v[0]!r} {v[1]!r}"


def write_video(spec: MotionSpec, directory) -> None:
    """Write one generated video: frames, ground-truth flow, motion summary."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    seq, gt = generate(spec)
    digits = max(2, len(str(spec.n_frames - 1)))
    for t, frame in enumerate(seq.frames):
        save_pgm(frame, directory / f"f{t:0{digits}d}.pgm")
    gt_dir = directory / "gt"
    gt_dir.mkdir(exist_ok=True)
    for t, fl in enumerate(gt.flows):
        write_flo(fl, gt_dir / f"pair_{t:0{digits}d}.flo")
    (gt_dir / "motion.txt").write_text(
        f"pattern={spec.pattern}\n"
        f"v0={_format_vec(gt.v0)}\n"
        f"a={_format_vec(gt.a)}\n"
        f"noise_sigma={spec.noise_sigma!r}\n"
    )


def write_benchmark(videos, out_dir) -> None:
    """Write all benchmark videos plus the 'path,class,split' manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for rec in videos:
        write_video(rec.spec, out_dir / rec.video_id)
        lines.append(f"{rec.video_id},{rec.label},{rec.split}")
    (out_dir / "manifest.txt").write_text("\n".join(lines) + "\n")
