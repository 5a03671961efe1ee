"""Feature preparation shared by the train and eval commands.

Turns videos on disk into classifier inputs: flow fields (with an
on-disk cache, since the flow solver dominates runtime), flow and
acceleration images, stacked volumes, and per-stream training sets.

Stack start positions: a video of N frames has N-1 flow images and, in
temporal mode, N-2 acceleration images.  For per-video prediction the
motion streams sample the start positions valid for both, i.e.
0 .. N-2-L in temporal mode, so their stacks stay aligned.  For training
each stream uses its own full valid range.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .classifier import prepare_frame_input, prepare_stack_input
from .config import Config
from .errors import DecodeError, EmptyDataset, MissingInput, TooFewFlows, TooShort
from .flow import FlowField, HsParams, estimate_horn_schunck, read_flo, write_flo
from .frames import FrameSequence, load_sequence, to_grayscale
from .motion import (
    accel_to_images,
    acceleration_spatial,
    acceleration_temporal,
    build_stack,
    flow_to_images,
)

STREAMS = ("spatial", "temporal", "accel")


def hs_params_from(cfg: Config) -> HsParams:
    return HsParams(
        smoothness=cfg["flow.smoothness"],
        iterations=cfg["flow.iterations"],
        pyramid_levels=cfg["flow.pyramid_levels"],
        warp_per_level=cfg["flow.warp_per_level"],
    )


def flows_for_sequence(seq: FrameSequence, params: HsParams) -> list:
    grays = [to_grayscale(f) for f in seq.frames]
    return [
        estimate_horn_schunck(grays[t], grays[t + 1], params)
        for t in range(len(grays) - 1)
    ]


def _params_tag(params: HsParams) -> str:
    return (
        f"smoothness={params.smoothness!r}\n"
        f"iterations={params.iterations}\n"
        f"pyramid_levels={params.pyramid_levels}\n"
        f"warp_per_level={params.warp_per_level}\n"
    )


def ensure_video_flows(seq: FrameSequence, params: HsParams,
                       cache_root=None, video_id: str = "") -> list:
    """Flow fields for a sequence, reusing a byte-exact on-disk cache.

    The cache is keyed by the solver parameters; a parameter change
    invalidates it wholesale.  Safe because .flo round-trips float32
    fields bit-exactly.
    """
    if cache_root is None:
        return flows_for_sequence(seq, params)
    cache_root = Path(cache_root)
    cache_root.mkdir(parents=True, exist_ok=True)
    tag_path = cache_root / "flow_params.txt"
    tag = _params_tag(params)
    if not tag_path.is_file() or tag_path.read_text() != tag:
        # parameters changed: drop every cached flow, then re-tag
        for stale in cache_root.glob("*/pair_*.flo"):
            stale.unlink()
        tag_path.write_text(tag)
    vdir = cache_root / (video_id or "seq")
    n_pairs = len(seq) - 1
    paths = [vdir / f"pair_{t:04d}.flo" for t in range(n_pairs)]
    if all(p.is_file() for p in paths):
        return [read_flo(p) for p in paths]
    flows = flows_for_sequence(seq, params)
    vdir.mkdir(parents=True, exist_ok=True)
    for p, f in zip(paths, flows):
        write_flo(f, p)
    return flows


def flow_image_pairs(flows, bound: float) -> list:
    return [flow_to_images(f, bound) for f in flows]


def accel_fields(flows, mode: str) -> list:
    """Acceleration fields from a flow list; N-1 spatial, N-2 temporal."""
    if mode == "spatial":
        if len(flows) < 1:
            raise TooFewFlows("spatial acceleration needs at least 1 flow field")
        return [acceleration_spatial(f) for f in flows]
    if len(flows) < 2:
        raise TooFewFlows("temporal acceleration needs at least 2 flow fields")
    return [
        acceleration_temporal(flows[t], flows[t + 1])
        for t in range(len(flows) - 1)
    ]


def accel_image_pairs(flows, mode: str, bound: float) -> list:
    return [accel_to_images(a, bound) for a in accel_fields(flows, mode)]


def train_starts(n_images: int, stack_length: int) -> range:
    """Every valid stack start over `n_images` motion-image pairs."""
    return range(max(0, n_images - stack_length + 1))


def aligned_starts(n_frames: int, stack_length: int, mode: str) -> range:
    """Start positions valid for both motion streams of one video.

    Temporal mode needs n_frames >= stack_length + 2 (raises TooShort
    otherwise, e.g. below 12 frames at the default stack length 10).
    """
    n_flow = n_frames - 1
    n_acc = n_flow if mode == "spatial" else n_flow - 1
    count = min(n_flow, n_acc) - stack_length + 1
    if count < 1:
        need = stack_length + (1 if mode == "spatial" else 2)
        raise TooShort(
            f"{n_frames} frames cannot host a length-{stack_length} stack "
            f"({mode} mode needs >= {need})"
        )
    return range(count)


def sample_even(n: int, count: int) -> list:
    """`count` evenly spaced indices out of n (all of them when n <= count)."""
    if n <= count:
        return list(range(n))
    pos = np.linspace(0, n - 1, count)
    return sorted({int(round(p)) for p in pos})


def sample_positions(n: int, policy: str, count: int) -> list:
    if policy == "all":
        return list(range(n))
    return sample_even(n, count)


# ---------------------------------------------------------------------------
# datasets on disk


class VideoRecord:
    __slots__ = ("video_id", "label", "split")

    def __init__(self, video_id: str, label: int, split: str):
        self.video_id = video_id
        self.label = label
        self.split = split


def load_manifest(data_dir) -> list:
    """Parse manifest.txt lines "path,class,split" into VideoRecords."""
    data_dir = Path(data_dir)
    path = data_dir / "manifest.txt"
    if not path.is_file():
        raise MissingInput(f"{path}: not found")
    records = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3 or parts[2] not in ("train", "test"):
            raise DecodeError(f"{path}:{lineno}: bad manifest line {line!r}")
        try:
            label = int(parts[1])
        except ValueError as e:
            raise DecodeError(f"{path}:{lineno}: bad class {parts[1]!r}") from e
        records.append(VideoRecord(parts[0], label, parts[2]))
    if not records:
        raise MissingInput(f"{path}: empty manifest")
    return records


def video_frames(data_dir, video_id: str) -> FrameSequence:
    return load_sequence(Path(data_dir) / video_id, "*.pgm")


def class_count(records) -> int:
    return max(r.label for r in records) + 1


def stream_channels(stream: str, cfg: Config) -> int:
    return 1 if stream == "spatial" else 2 * cfg["stack.length"]


def video_stream_inputs(seq: FrameSequence, stream: str, cfg: Config,
                        flows=None, starts=None) -> list:
    """Classifier inputs for one video and one stream.

    `starts` defaults to the stream's full valid range; pass aligned
    starts for per-video prediction.  `flows` lets callers reuse cached
    fields (required for the motion streams).
    """
    size = cfg["train.input_size"]
    if stream == "spatial":
        idx = starts if starts is not None else range(len(seq))
        return [prepare_frame_input(seq[i], size, size) for i in idx]
    if flows is None:
        raise MissingInput(f"{stream} stream needs flow fields")
    length = cfg["stack.length"]
    if stream == "temporal":
        pairs = flow_image_pairs(flows, cfg["quant.bound_flow"])
    else:
        pairs = accel_image_pairs(flows, cfg["accel.mode"], cfg["quant.bound_accel"])
    idx = starts if starts is not None else train_starts(len(pairs), length)
    return [
        prepare_stack_input(build_stack(pairs, s, length), size, size)
        for s in idx
    ]


def build_training_set(data_dir, stream: str, cfg: Config, cache_root=None):
    """(examples, class count) for the train split of a dataset directory."""
    records = [r for r in load_manifest(data_dir) if r.split == "train"]
    if not records:
        raise EmptyDataset(f"{data_dir}: no training videos in manifest")
    k = class_count(load_manifest(data_dir))
    params = hs_params_from(cfg)
    examples = []
    for rec in records:
        seq = video_frames(data_dir, rec.video_id)
        flows = None
        if stream != "spatial":
            flows = ensure_video_flows(seq, params, cache_root, rec.video_id)
        for x in video_stream_inputs(seq, stream, cfg, flows=flows):
            examples.append((x, rec.label))
    if not examples:
        raise EmptyDataset(f"{data_dir}: training videos yielded no examples")
    return examples, k
