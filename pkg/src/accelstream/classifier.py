"""Per-stream softmax classifier, small enough to train in seconds.

Architecture: one 3x3 conv layer (8 filters, clamp padding) -> ReLU ->
global average pooling -> dropout (training only, inverted scaling) ->
affine -> softmax.  Parameters are float64; training is plain SGD with
momentum on the cross-entropy loss, fully deterministic given a seed.

Inputs are (channels, height, width) float arrays.  Frames are resized
to the model input size and scaled to [0, 1]; motion stacks are scaled
to [0, 1] and centered by subtracting 0.5 so that zero motion sits near
0, then resized channel-wise.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    BadConfig,
    BadMagic,
    EmptyDataset,
    LabelOutOfRange,
    OutOfRange,
    ShapeMismatch,
    TruncatedFile,
    VersionMismatch,
)
from .frames import Frame, resize_bilinear, to_grayscale
from .motion import StackedVolume
from .seeding import DROPOUT_STREAM, INIT_STREAM, SHUFFLE_STREAM, derive_rng

N_FILTERS = 8
MODEL_MAGIC = b"ACS1"
MODEL_VERSION = 1


@dataclass(frozen=True)
class Model:
    input_width: int
    input_height: int
    input_channels: int
    k: int
    dropout_p: float
    conv_w: np.ndarray  # (8, C, 3, 3)
    conv_b: np.ndarray  # (8,)
    fc_w: np.ndarray    # (K, 8)
    fc_b: np.ndarray    # (K,)

    def __post_init__(self):
        if self.k < 2:
            raise BadConfig(f"need at least 2 classes, got {self.k}")
        if not (0.0 <= self.dropout_p < 1.0):
            raise BadConfig(f"dropout_p must be in [0, 1), got {self.dropout_p}")
        shapes = {
            "conv_w": (N_FILTERS, self.input_channels, 3, 3),
            "conv_b": (N_FILTERS,),
            "fc_w": (self.k, N_FILTERS),
            "fc_b": (self.k,),
        }
        for name, shape in shapes.items():
            # private copy: freezing must never leak back into caller arrays
            arr = np.array(getattr(self, name), dtype=np.float64, order="C")
            if arr.shape != shape:
                raise ShapeMismatch(f"{name} shape {arr.shape}, expected {shape}")
            if not np.isfinite(arr).all():
                raise BadConfig(f"{name} contains non-finite values")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class ScoreVector:
    """Softmax output: non-negative scores summing to 1."""

    scores: np.ndarray

    def __post_init__(self):
        s = np.ascontiguousarray(np.asarray(self.scores, dtype=np.float64))
        if s.ndim != 1:
            raise ShapeMismatch(f"scores must be 1-D, got shape {s.shape}")
        if not np.isfinite(s).all() or (s < 0).any():
            raise OutOfRange("scores must be finite and non-negative")
        if abs(float(s.sum()) - 1.0) > 1e-6:
            raise OutOfRange(f"scores sum to {s.sum()}, not 1")
        s.setflags(write=False)
        object.__setattr__(self, "scores", s)

    def __len__(self) -> int:
        return self.scores.shape[0]

    @property
    def label(self) -> int:
        # ties resolve to the lowest index
        return int(np.argmax(self.scores))


@dataclass(frozen=True)
class LrSchedule:
    """Step decay: initial * decay_factor ** floor(iteration / decay_every)."""

    initial: float = 0.001
    decay_factor: float = 0.1
    decay_every: int = 10_000
    stop_at: int = 50_000

    def __post_init__(self):
        if not (self.initial >= 0):
            raise BadConfig(f"initial lr must be >= 0, got {self.initial}")
        if not (0 < self.decay_factor < 1):
            raise BadConfig(
                f"decay_factor must be in (0, 1), got {self.decay_factor}"
            )
        if self.decay_every < 1:
            raise BadConfig(f"decay_every must be >= 1, got {self.decay_every}")
        if self.stop_at < 1:
            raise BadConfig(f"stop_at must be >= 1, got {self.stop_at}")


def lr_at(s: LrSchedule, iteration: int) -> float:
    if iteration < 0 or iteration >= s.stop_at:
        raise OutOfRange(
            f"iteration {iteration} outside [0, {s.stop_at}) (training terminates)"
        )
    return s.initial * s.decay_factor ** (iteration // s.decay_every)


def init_model(
    input_width: int,
    input_height: int,
    input_channels: int,
    k: int,
    dropout_p: float = 0.0,
    seed: int = 0,
) -> Model:
    """Uniform(-s, s) init with s = sqrt(6 / (fan_in + fan_out)); zero biases."""
    if k < 2:
        raise BadConfig(f"need at least 2 classes, got {k}")
    if input_width < 2 or input_height < 2 or input_channels < 1:
        raise BadConfig(
            f"bad input dims {input_width}x{input_height}x{input_channels}"
        )
    rng = derive_rng(INIT_STREAM, seed)
    s_conv = np.sqrt(6.0 / (input_channels * 9 + N_FILTERS * 9))
    conv_w = rng.uniform(-s_conv, s_conv, size=(N_FILTERS, input_channels, 3, 3))
    s_fc = np.sqrt(6.0 / (N_FILTERS + k))
    fc_w = rng.uniform(-s_fc, s_fc, size=(k, N_FILTERS))
    return Model(
        input_width=int(input_width),
        input_height=int(input_height),
        input_channels=int(input_channels),
        k=int(k),
        dropout_p=float(dropout_p),
        conv_w=conv_w,
        conv_b=np.zeros(N_FILTERS),
        fc_w=fc_w,
        fc_b=np.zeros(k),
    )


# ---------------------------------------------------------------------------
# input preparation


def prepare_frame_input(f: Frame, width: int, height: int) -> np.ndarray:
    """Grayscale frame resized to the model size, scaled to [0, 1]; (1, H, W)."""
    g = resize_bilinear(to_grayscale(f), width, height)
    return (g.pixels.astype(np.float64) / 255.0)[None, :, :]


def prepare_stack_input(vol: StackedVolume, width: int, height: int) -> np.ndarray:
    """Stack channels scaled to [0, 1], centered at 0.5, resized; (2L, H, W)."""
    raw = vol.channels.astype(np.float64) / 255.0 - 0.5
    if vol.width == width and vol.height == height:
        return raw
    out = np.empty((raw.shape[0], height, width), dtype=np.float64)
    for c in range(raw.shape[0]):
        out[c] = kernels.resize_bilinear(raw[c], height, width)
    return out


def _as_input(m: Model, x) -> np.ndarray:
    if isinstance(x, Frame):
        if m.input_channels != 1:
            raise ShapeMismatch(
                f"model expects {m.input_channels} channels, frame has 1"
            )
        return prepare_frame_input(x, m.input_width, m.input_height)
    if isinstance(x, StackedVolume):
        if x.channels.shape[0] != m.input_channels:
            raise ShapeMismatch(
                f"model expects {m.input_channels} channels, "
                f"stack has {x.channels.shape[0]}"
            )
        return prepare_stack_input(x, m.input_width, m.input_height)
    arr = np.asarray(x, dtype=np.float64)
    want = (m.input_channels, m.input_height, m.input_width)
    if arr.shape != want:
        raise ShapeMismatch(f"input shape {arr.shape}, expected {want}")
    return arr


# ---------------------------------------------------------------------------
# forward / backward


def _softmax(z: np.ndarray) -> np.ndarray:
    zs = z - z.max(axis=1, keepdims=True)
    e = np.exp(zs)
    return e / e.sum(axis=1, keepdims=True)


def _forward_batch(m: Model, xb: np.ndarray, mask):
    conv_out, cols = kernels.conv3x3_forward(xb, m.conv_w, m.conv_b)
    relu = np.maximum(conv_out, 0.0)
    pooled = relu.mean(axis=(2, 3))
    dropped = pooled if mask is None else pooled * mask
    logits = dropped @ m.fc_w.T + m.fc_b
    cache = (cols, conv_out, pooled, dropped)
    return logits, cache


def _loss_and_grads(m: Model, xb: np.ndarray, yb: np.ndarray, mask):
    bsz = xb.shape[0]
    logits, (cols, conv_out, pooled, dropped) = _forward_batch(m, xb, mask)
    zmax = logits.max(axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(np.exp(logits - zmax).sum(axis=1))
    loss = float(np.mean(lse - logits[np.arange(bsz), yb]))

    dlogits = _softmax(logits)
    dlogits[np.arange(bsz), yb] -= 1.0
    dlogits /= bsz
    dfc_w = dlogits.T @ dropped
    dfc_b = dlogits.sum(axis=0)
    ddropped = dlogits @ m.fc_w
    dpooled = ddropped if mask is None else ddropped * mask
    h, w = conv_out.shape[2], conv_out.shape[3]
    # relu'(0) = 0 by the strict > comparison
    drelu = (dpooled / (h * w))[:, :, None, None] * (conv_out > 0)
    dconv_w, dconv_b = kernels.conv3x3_grad_params(cols, drelu)
    return loss, {
        "conv_w": dconv_w,
        "conv_b": dconv_b,
        "fc_w": dfc_w,
        "fc_b": dfc_b,
    }


def forward(m: Model, x, train_mode: bool = False, seed: int = 0) -> ScoreVector:
    """Score a single input; dropout is applied only in train mode."""
    xb = _as_input(m, x)[None]
    mask = None
    if train_mode and m.dropout_p > 0.0:
        rng = derive_rng(DROPOUT_STREAM, seed)
        keep = rng.random((1, N_FILTERS)) >= m.dropout_p
        mask = keep.astype(np.float64) / (1.0 - m.dropout_p)
    logits, _ = _forward_batch(m, xb, mask)
    return ScoreVector(_softmax(logits)[0])


def train(m: Model, dataset, s: LrSchedule, batch: int = 16,
          momentum: float = 0.9, seed: int = 0):
    """SGD with momentum for s.stop_at iterations; returns (model, loss history).

    dataset is a sequence of (input, label) pairs where input is a Frame,
    a StackedVolume, or a prepared (C, H, W) array.  Shuffling and dropout
    use PRNG streams derived from `seed`; the loss history records the
    pre-update batch loss at every iteration.
    """
    items = list(dataset)
    if not items:
        raise EmptyDataset("training dataset is empty")
    xs = np.stack([_as_input(m, x) for x, _ in items])
    ys = np.asarray([int(y) for _, y in items], dtype=np.int64)
    if ys.min() < 0 or ys.max() >= m.k:
        bad = ys.min() if ys.min() < 0 else ys.max()
        raise LabelOutOfRange(f"label {bad} outside [0, {m.k})")
    if batch < 1:
        raise BadConfig(f"batch must be >= 1, got {batch}")
    n = len(items)

    rng_shuffle = derive_rng(SHUFFLE_STREAM, seed)
    rng_drop = derive_rng(DROPOUT_STREAM, seed)
    params = {
        "conv_w": m.conv_w.copy(),
        "conv_b": m.conv_b.copy(),
        "fc_w": m.fc_w.copy(),
        "fc_b": m.fc_b.copy(),
    }
    vel = {name: np.zeros_like(p) for name, p in params.items()}
    queue: list = []
    history = []
    cur = m
    for it in range(s.stop_at):
        lr = lr_at(s, it)
        while len(queue) < batch:
            queue.extend(rng_shuffle.permutation(n).tolist())
        idx = np.asarray(queue[:batch], dtype=np.int64)
        del queue[:batch]
        xb = xs[idx]
        yb = ys[idx]
        mask = None
        if m.dropout_p > 0.0:
            keep = rng_drop.random((batch, N_FILTERS)) >= m.dropout_p
            mask = keep.astype(np.float64) / (1.0 - m.dropout_p)
        loss, grads = _loss_and_grads(cur, xb, yb, mask)
        history.append(loss)
        for name in params:
            vel[name] = momentum * vel[name] - lr * grads[name]
            params[name] = params[name] + vel[name]
        cur = Model(
            input_width=m.input_width,
            input_height=m.input_height,
            input_channels=m.input_channels,
            k=m.k,
            dropout_p=m.dropout_p,
            conv_w=params["conv_w"],
            conv_b=params["conv_b"],
            fc_w=params["fc_w"],
            fc_b=params["fc_b"],
        )
    return cur, history


def gradient_check(m: Model, sample, epsilon: float = 1e-4) -> float:
    """Max relative error between analytic and central-difference gradients.

    Evaluates the full parameter set, so only sensible on tiny models.
    Dropout is disabled for the check.
    """
    x, y = sample
    xb = _as_input(m, x)[None]
    yb = np.asarray([int(y)], dtype=np.int64)
    _, grads = _loss_and_grads(m, xb, yb, None)

    names = ("conv_w", "conv_b", "fc_w", "fc_b")
    params = {name: getattr(m, name).copy() for name in names}

    def loss_for(ps):
        probe = Model(
            input_width=m.input_width,
            input_height=m.input_height,
            input_channels=m.input_channels,
            k=m.k,
            dropout_p=m.dropout_p,
            conv_w=ps["conv_w"],
            conv_b=ps["conv_b"],
            fc_w=ps["fc_w"],
            fc_b=ps["fc_b"],
        )
        loss, _ = _loss_and_grads(probe, xb, yb, None)
        return loss

    worst = 0.0
    for name in names:
        flat = params[name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + epsilon
            lp = loss_for(params)
            flat[i] = orig - epsilon
            lm = loss_for(params)
            flat[i] = orig
            g_num = (lp - lm) / (2.0 * epsilon)
            g_ana = grads[name].reshape(-1)[i]
            rel = abs(g_ana - g_num) / max(abs(g_ana) + abs(g_num), 1e-8)
            worst = max(worst, rel)
    return worst


# ---------------------------------------------------------------------------
# persistence


def save_model(m: Model) -> bytes:
    head = MODEL_MAGIC + struct.pack(
        "<IIIII", MODEL_VERSION, m.input_width, m.input_height,
        m.input_channels, m.k,
    )
    head += struct.pack("<d", m.dropout_p)
    body = b"".join(
        np.ascontiguousarray(getattr(m, name), dtype="<f8").tobytes()
        for name in ("conv_w", "conv_b", "fc_w", "fc_b")
    )
    return head + body


def load_model(data: bytes) -> Model:
    if len(data) < 4 or data[:4] != MODEL_MAGIC:
        raise BadMagic(f"bad model magic {data[:4]!r}")
    if len(data) < 32:
        raise TruncatedFile(f"model header truncated ({len(data)} bytes)")
    version, w, h, c, k = struct.unpack_from("<IIIII", data, 4)
    if version != MODEL_VERSION:
        raise VersionMismatch(f"model version {version}, expected {MODEL_VERSION}")
    (dropout_p,) = struct.unpack_from("<d", data, 24)
    counts = (N_FILTERS * c * 9, N_FILTERS, k * N_FILTERS, k)
    need = 32 + 8 * sum(counts)
    if len(data) != need:
        raise TruncatedFile(f"model payload is {len(data)} bytes, expected {need}")
    offset = 32
    arrays = []
    for count in counts:
        arrays.append(np.frombuffer(data, dtype="<f8", count=count, offset=offset))
        offset += 8 * count
    conv_w = arrays[0].reshape(N_FILTERS, c, 3, 3).copy()
    return Model(
        input_width=w,
        input_height=h,
        input_channels=c,
        k=k,
        dropout_p=dropout_p,
        conv_w=conv_w,
        conv_b=arrays[1].copy(),
        fc_w=arrays[2].reshape(k, N_FILTERS).copy(),
        fc_b=arrays[3].copy(),
    )
