"""Plain-text experiment configuration.

Files hold one "key = value" per line with "#" comments.  Keys are
namespaced, every key has a documented default matching the module
defaults, and unknown keys are rejected so typos cannot silently fall
back to defaults.
"""

from __future__ import annotations

from pathlib import Path

from .errors import BadConfig


def _positive_float(v: float) -> bool:
    return v > 0


def _nonneg_float(v: float) -> bool:
    return v >= 0


def _positive_int(v: int) -> bool:
    return v >= 1


# key -> (parser, default, validator or None, help)
REGISTRY = {
    "flow.smoothness": (float, 15.0, _positive_float, "regularizer weight"),
    "flow.iterations": (int, 100, _positive_int, "relaxation sweeps per warp"),
    "flow.pyramid_levels": (int, 3, _positive_int, "coarse-to-fine levels"),
    "flow.warp_per_level": (int, 1, _positive_int, "warps per pyramid level"),
    "quant.bound_flow": (float, 20.0, _positive_float, "flow image clip bound, px/frame"),
    "quant.bound_accel": (float, 8.0, _positive_float, "acceleration image clip bound"),
    "accel.mode": (str, "temporal", None, "spatial | temporal"),
    "stack.length": (int, 10, _positive_int, "frames per stacked volume"),
    "train.lr": (float, 0.001, _nonneg_float, "initial learning rate"),
    "train.decay_factor": (float, 0.1, None, "lr multiplier per decay step"),
    "train.decay_every": (int, 10_000, _positive_int, "iterations between decays"),
    "train.stop_at": (int, 50_000, _positive_int, "total training iterations"),
    "train.batch": (int, 16, _positive_int, "minibatch size"),
    "train.momentum": (float, 0.9, _nonneg_float, "SGD momentum"),
    "train.dropout": (float, 0.0, _nonneg_float, "dropout probability"),
    "train.input_size": (int, 16, _positive_int, "classifier input side, px"),
    "fusion.alpha": (float, 2.0, _nonneg_float, "temporal stream weight"),
    "fusion.beta": (float, 2.0, _nonneg_float, "acceleration stream weight"),
    "eval.sampling": (str, "all", None, "all | even"),
    "eval.sample_count": (int, 5, _positive_int, "positions under 'even' sampling"),
    "synth.frames": (int, 12, _positive_int, "frames per synthetic video"),
    "synth.width": (int, 192, _positive_int, "synthetic frame width"),
    "synth.height": (int, 192, _positive_int, "synthetic frame height"),
}

_CHOICES = {
    "accel.mode": ("spatial", "temporal"),
    "eval.sampling": ("all", "even"),
}


class Config:
    """Immutable snapshot of the full key space."""

    def __init__(self, values=None):
        vals = dict(DEFAULTS)
        if values:
            for key, raw in values.items():
                vals[key] = _coerce(key, raw)
        self._values = vals

    def __getitem__(self, key: str):
        if key not in self._values:
            raise BadConfig(f"unknown config key {key!r}")
        return self._values[key]

    def with_overrides(self, values) -> "Config":
        merged = dict(self._values)
        for key, raw in values.items():
            merged[key] = _coerce(key, raw)
        cfg = Config()
        cfg._values = merged
        return cfg

    def as_dict(self) -> dict:
        return dict(self._values)


def _coerce(key: str, raw):
    if key not in REGISTRY:
        raise BadConfig(f"unknown config key {key!r}")
    parser, _, validator, _ = REGISTRY[key]
    if isinstance(raw, str):
        try:
            value = parser(raw.strip())
        except ValueError as e:
            raise BadConfig(f"{key}: cannot parse {raw!r} as {parser.__name__}") from e
    else:
        value = parser(raw)
    if key in _CHOICES and value not in _CHOICES[key]:
        raise BadConfig(f"{key}: {value!r} not in {_CHOICES[key]}")
    if validator is not None and not validator(value):
        raise BadConfig(f"{key}: invalid value {value!r}")
    return value


DEFAULTS = {key: spec[1] for key, spec in REGISTRY.items()}


def parse_config(text: str) -> dict:
    """Parse "key = value" lines into a raw string map; '#' starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise BadConfig(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = stripped.split("=", 1)
        values[key.strip()] = raw.strip()
    return values


def load_config(path=None, overrides=None) -> Config:
    """Defaults, overlaid by an optional file, overlaid by explicit overrides."""
    cfg = Config()
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise BadConfig(f"config file {p} not found")
        cfg = cfg.with_overrides(parse_config(p.read_text()))
    if overrides:
        cfg = cfg.with_overrides(overrides)
    return cfg
