"""Weighted late fusion of per-stream scores and the per-video protocol.

Fused score: f = f_spa + alpha * f_tem + beta * f_acc, element-wise,
not renormalized; only the argmax is consumed downstream.  Evaluation
scores whole videos: each stream's softmax outputs are averaged over the
sampled frames / stacks, fused, and argmaxed (ties to the lowest index).
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifier import Model, ScoreVector, forward
from .config import Config
from .errors import BadConfig, EmptySplit, LabelOutOfRange, LengthMismatch
from .frames import FrameSequence
from .pipeline import (
    aligned_starts,
    class_count,
    ensure_video_flows,
    hs_params_from,
    load_manifest,
    sample_positions,
    video_frames,
    video_stream_inputs,
)

REPORT_ROWS = ("spatial", "temporal", "acceleration", "two_stream", "three_stream")


@dataclass(frozen=True)
class FusionWeights:
    """alpha weights the temporal stream, beta the acceleration stream."""

    alpha: float = 2.0
    beta: float = 2.0

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0:
                raise BadConfig(f"{name} must be finite and >= 0, got {v}")
            object.__setattr__(self, name, v)


def fuse_arrays(spa, tem, acc, w: FusionWeights) -> np.ndarray:
    """The fusion formula on raw arrays: spa + alpha * tem + beta * acc."""
    spa = np.asarray(spa, dtype=np.float64)
    tem = np.asarray(tem, dtype=np.float64)
    acc = np.asarray(acc, dtype=np.float64)
    return spa + w.alpha * tem + w.beta * acc


def fuse(f_spa: ScoreVector, f_tem: ScoreVector, f_acc: ScoreVector,
         w: FusionWeights = FusionWeights()) -> np.ndarray:
    """f_spa + alpha * f_tem + beta * f_acc (not renormalized)."""
    if not (len(f_spa) == len(f_tem) == len(f_acc)):
        raise LengthMismatch(
            f"score lengths differ: {len(f_spa)}, {len(f_tem)}, {len(f_acc)}"
        )
    return fuse_arrays(f_spa.scores, f_tem.scores, f_acc.scores, w)


@dataclass(frozen=True)
class VideoPrediction:
    video_id: str
    spatial: ScoreVector
    temporal: ScoreVector
    accel: ScoreVector
    fused: np.ndarray
    label: int

    def stream_label(self, row: str, w: FusionWeights) -> int:
        """Predicted label under one report row's fusion setting."""
        if row == "spatial":
            return self.spatial.label
        if row == "temporal":
            return self.temporal.label
        if row == "acceleration":
            return self.accel.label
        if row == "two_stream":
            return int(np.argmax(self.spatial.scores + w.alpha * self.temporal.scores))
        if row == "three_stream":
            return self.label
        raise BadConfig(f"unknown report row {row!r}")


def _mean_scores(model: Model, inputs) -> ScoreVector:
    rows = np.stack([forward(model, x).scores for x in inputs])
    return ScoreVector(rows.mean(axis=0))


def predict_video(models, video: FrameSequence, cfg: Config,
                  w: FusionWeights = FusionWeights(), flows=None,
                  video_id: str = "") -> VideoPrediction:
    """Fuse per-stream average scores for one video.

    `models` is (spatial, temporal, acceleration).  The sampling policy
    (eval.sampling / eval.sample_count) picks frames for the spatial
    stream and, from the aligned valid range, stack starts for the two
    motion streams.
    """
    m_spa, m_tem, m_acc = models
    policy = cfg["eval.sampling"]
    count = cfg["eval.sample_count"]
    starts_all = aligned_starts(
        len(video), cfg["stack.length"], cfg["accel.mode"]
    )
    starts = [starts_all[i] for i in
              sample_positions(len(starts_all), policy, count)]
    frame_idx = sample_positions(len(video), policy, count)
    if flows is None:
        flows = ensure_video_flows(video, hs_params_from(cfg), None, video_id)

    spa = _mean_scores(
        m_spa, video_stream_inputs(video, "spatial", cfg, starts=frame_idx)
    )
    tem = _mean_scores(
        m_tem, video_stream_inputs(video, "temporal", cfg, flows=flows, starts=starts)
    )
    acc = _mean_scores(
        m_acc, video_stream_inputs(video, "accel", cfg, flows=flows, starts=starts)
    )
    fused = fuse(spa, tem, acc, w)
    return VideoPrediction(
        video_id=video_id,
        spatial=spa,
        temporal=tem,
        accel=acc,
        fused=fused,
        label=int(np.argmax(fused)),
    )


@dataclass(frozen=True)
class EvalItem:
    video_id: str
    true_label: int
    prediction: VideoPrediction


@dataclass(frozen=True)
class EvalReport:
    accuracies: dict          # row name -> fraction in [0, 1]
    confusion: np.ndarray     # three-stream; rows = true, cols = predicted
    items: tuple
    weights: FusionWeights

    def text_table(self) -> str:
        lines = ["stream          accuracy"]
        for row in REPORT_ROWS:
            lines.append(f"{row:<14} {100.0 * self.accuracies[row]:8.2f}%")
        lines.append("")
        lines.append("confusion (rows = true, cols = predicted):")
        for r in range(self.confusion.shape[0]):
            lines.append(" ".join(f"{int(v):4d}" for v in self.confusion[r]))
        return "\n".join(lines) + "\n"

    def csv_text(self) -> str:
        lines = ["stream,accuracy"]
        for row in REPORT_ROWS:
            lines.append(f"{row},{self.accuracies[row]:.4f}")
        return "\n".join(lines) + "\n"


def evaluate(models, data_dir, cfg: Config,
             w: FusionWeights = FusionWeights(), cache_root=None) -> EvalReport:
    """Per-video accuracy on the test split, per stream and fused."""
    records = load_manifest(data_dir)
    test = [r for r in records if r.split == "test"]
    if not test:
        raise EmptySplit(f"{data_dir}: no test videos in manifest")
    k = models[0].k
    for m in models:
        if m.k != k:
            raise LengthMismatch("models disagree on class count")
    if class_count(records) > k:
        raise LabelOutOfRange(
            f"manifest has labels up to {class_count(records) - 1}, models have k={k}"
        )
    params = hs_params_from(cfg)
    items = []
    for rec in test:
        seq = video_frames(data_dir, rec.video_id)
        flows = ensure_video_flows(seq, params, cache_root, rec.video_id)
        pred = predict_video(models, seq, cfg, w, flows=flows,
                             video_id=rec.video_id)
        items.append(EvalItem(rec.video_id, rec.label, pred))

    accuracies = {}
    for row in REPORT_ROWS:
        hits = sum(
            1 for it in items
            if it.prediction.stream_label(row, w) == it.true_label
        )
        accuracies[row] = hits / len(items)
    confusion = np.zeros((k, k), dtype=np.int64)
    for it in items:
        confusion[it.true_label, it.prediction.label] += 1
    return EvalReport(
        accuracies=accuracies,
        confusion=confusion,
        items=tuple(items),
        weights=w,
    )


def write_report(report: EvalReport, out_dir) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.txt").write_text(report.text_table())
    (out_dir / "report.csv").write_text(report.csv_text())
