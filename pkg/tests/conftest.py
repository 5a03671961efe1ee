"""Shared fixtures: tiny deterministic videos and backend handling."""

import numpy as np
import pytest

from accelstream import backend as backend_mod
from accelstream.frames import Frame, FrameSequence
from accelstream.synth import MotionSpec, generate


def available_backends():
    """Backends that can actually run on this machine."""
    names = ["numpy"]
    if backend_mod.HAVE_NUMBA:
        names.append("numba")
    return names


@pytest.fixture
def restore_backend():
    """Snapshot the active backend and restore it after the test."""
    saved = backend_mod.current_backend()
    yield
    backend_mod.set_backend(saved)


@pytest.fixture(params=available_backends())
def each_backend(request, restore_backend):
    """Run the test once per available backend."""
    backend_mod.set_backend(request.param)
    return request.param


def texture_frame(seed: int, height: int = 64, width: int = 64) -> Frame:
    """A static random-texture frame (no motion), for I/O style tests."""
    spec = MotionSpec("random-texture", (0.0, 0.0), (0.0, 0.0), n_frames=2,
                      width=width, height=height, seed=seed)
    seq, _ = generate(spec)
    return seq.frames[0]


def translating_pair(vx: float, vy: float, seed: int = 0,
                     size: int = 64) -> FrameSequence:
    """Two textured frames where content moves by (vx, vy) pixels."""
    spec = MotionSpec("random-texture", (vx, vy), (0.0, 0.0), n_frames=2,
                      width=size, height=size, seed=seed)
    seq, _ = generate(spec)
    return seq


def small_video(vx: float, vy: float, a: tuple = (0.0, 0.0), seed: int = 0,
                n_frames: int = 12, size: int = 48) -> FrameSequence:
    """A short textured clip with the given motion, sized for fast tests."""
    spec = MotionSpec("random-texture", (vx, vy), a, n_frames=n_frames,
                      width=size, height=size, seed=seed)
    seq, _ = generate(spec)
    return seq


def write_mini_dataset(root, n_train=2, n_test=1, size=48, n_frames=12):
    """Write a tiny two-class benchmark (x motion vs y motion) to disk.

    Returns the dataset directory.  Much smaller than the real benchmark;
    meant for exercising the training/eval plumbing, not for accuracy.
    """
    from accelstream.synth import write_video

    root = _ensure_dir(root)
    lines = []
    idx = 0
    for label, (vx, vy) in enumerate([(0.7, 0.0), (0.0, 0.7)]):
        for j in range(n_train + n_test):
            split = "train" if j < n_train else "test"
            vid = f"vid{idx:03d}"
            spec = MotionSpec("random-texture", (vx, vy), (0.0, 0.0),
                              n_frames=n_frames, width=size, height=size,
                              seed=1000 + idx)
            write_video(spec, root / vid)
            lines.append(f"{vid},{label},{split}")
            idx += 1
    (root / "manifest.txt").write_text("\n".join(lines) + "\n")
    return root


def _ensure_dir(p):
    from pathlib import Path

    p = Path(p)
    p.mkdir(parents=True, exist_ok=True)
    return p


@pytest.fixture(scope="session")
def mini_dataset(tmp_path_factory):
    """Session-wide tiny dataset; flows are cached inside it by the CLI."""
    root = tmp_path_factory.mktemp("mini_dataset")
    return write_mini_dataset(root)


def as_uint8(a) -> np.ndarray:
    return np.asarray(a, dtype=np.uint8)
