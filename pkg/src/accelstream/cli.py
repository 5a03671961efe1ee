"""Command-line surface: flow, accel, stack, synth, train, eval, fuse.

Every command is deterministic given (inputs, config, seed).  Settings
resolve in precedence order: built-in defaults, then --config file, then
--set KEY=VALUE overrides, then dedicated flags.  Diagnostics go to
stderr; data goes to files (or stdout for eval/fuse when no output path
is given).  Exit code 0 on success, 1 on any reported error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .classifier import LrSchedule, init_model, load_model, save_model, train
from .config import load_config
from .errors import (
    AccelStreamError,
    BadConfig,
    DecodeError,
    LengthMismatch,
    MissingInput,
)
from .flow import FlowField, read_flo, write_flo
from .frames import load_sequence
from .fusion import FusionWeights, evaluate, fuse_arrays, write_report
from .motion import (
    accel_to_images,
    build_stack,
    flow_to_images,
    read_motion_image,
    write_motion_image,
    write_stack,
)
from .pipeline import (
    accel_fields,
    build_training_set,
    flows_for_sequence,
    hs_params_from,
    stream_channels,
)
from .synth import make_benchmark, write_benchmark


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _parse_sets(pairs) -> dict:
    overrides = {}
    for item in pairs or ():
        if "=" not in item:
            raise BadConfig(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    return overrides


def _config_from(args):
    return load_config(args.config, _parse_sets(args.set))


def _write_field_images(stem: Path, x_img, y_img) -> None:
    write_motion_image(x_img, stem.parent / (stem.name + "_x.pgm"))
    write_motion_image(y_img, stem.parent / (stem.name + "_y.pgm"))


# ---------------------------------------------------------------------------
# subcommands


def cmd_flow(args, cfg) -> int:
    seq = load_sequence(args.frames, args.pattern)
    flows = flows_for_sequence(seq, hs_params_from(cfg))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bound = cfg["quant.bound_flow"]
    for t, f in enumerate(flows):
        stem = out / f"flow_{t:04d}"
        write_flo(f, stem.with_suffix(".flo"))
        x_img, y_img = flow_to_images(f, bound)
        _write_field_images(stem, x_img, y_img)
    return 0


def _load_flow_dir(directory) -> list:
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingInput(f"{directory}: not a directory")
    paths = sorted(directory.glob("*.flo"), key=lambda p: p.name)
    return [read_flo(p) for p in paths]


def cmd_accel(args, cfg) -> int:
    mode = args.mode or cfg["accel.mode"]
    flows = _load_flow_dir(args.flows)
    fields = accel_fields(flows, mode)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bound = cfg["quant.bound_accel"]
    for t, a in enumerate(fields):
        stem = out / f"accel_{t:04d}"
        # reuse the flow container layout for the (ax, ay) planes
        write_flo(FlowField(a.ax, a.ay), stem.with_suffix(".flo"))
        x_img, y_img = accel_to_images(a, bound)
        _write_field_images(stem, x_img, y_img)
    return 0


def cmd_stack(args, cfg) -> int:
    directory = Path(args.images)
    if not directory.is_dir():
        raise MissingInput(f"{directory}: not a directory")
    x_paths = sorted(directory.glob("*_x.pgm"), key=lambda p: p.name)
    if not x_paths:
        raise MissingInput(f"{directory}: no *_x.pgm motion images found")
    pairs = []
    for xp in x_paths:
        yp = xp.parent / (xp.name[: -len("_x.pgm")] + "_y.pgm")
        if not yp.is_file():
            raise MissingInput(f"{yp}: missing y-image for {xp.name}")
        pairs.append((read_motion_image(xp), read_motion_image(yp)))
    vol = build_stack(pairs, args.start, cfg["stack.length"])
    write_stack(vol, args.out)
    return 0


def cmd_synth(args, cfg) -> int:
    videos = make_benchmark(
        args.seed,
        n_frames=cfg["synth.frames"],
        width=cfg["synth.width"],
        height=cfg["synth.height"],
    )
    write_benchmark(videos, args.out)
    return 0


def cmd_train(args, cfg) -> int:
    cache_root = Path(args.data) / "_features"
    examples, k = build_training_set(args.data, args.stream, cfg, cache_root)
    size = cfg["train.input_size"]
    model = init_model(
        size,
        size,
        stream_channels(args.stream, cfg),
        k,
        dropout_p=cfg["train.dropout"],
        seed=args.seed,
    )
    schedule = LrSchedule(
        initial=cfg["train.lr"],
        decay_factor=cfg["train.decay_factor"],
        decay_every=cfg["train.decay_every"],
        stop_at=cfg["train.stop_at"],
    )
    trained, history = train(
        model,
        examples,
        schedule,
        batch=cfg["train.batch"],
        momentum=cfg["train.momentum"],
        seed=args.seed,
    )
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(save_model(trained))
    loss_path = out.parent / (out.name + ".loss.txt")
    loss_path.write_text("".join(f"{v!r}\n" for v in history))
    return 0


def cmd_eval(args, cfg) -> int:
    models = tuple(
        load_model(Path(p).read_bytes())
        for p in (args.spatial, args.temporal, args.accel)
    )
    weights = FusionWeights(cfg["fusion.alpha"], cfg["fusion.beta"])
    cache_root = Path(args.data) / "_features"
    report = evaluate(models, args.data, cfg, weights, cache_root)
    if args.out:
        write_report(report, args.out)
    else:
        sys.stdout.write(report.text_table())
    return 0


def _read_scores(path) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            rows.append([float(tok) for tok in line.replace(",", " ").split()])
        except ValueError as e:
            raise DecodeError(f"{path}:{lineno}: bad score line {line!r}") from e
    if not rows:
        raise MissingInput(f"{path}: no score rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise LengthMismatch(f"{path}: rows have inconsistent lengths")
    return np.asarray(rows, dtype=np.float64)


def cmd_fuse(args, cfg) -> int:
    alpha = cfg["fusion.alpha"] if args.alpha is None else args.alpha
    beta = cfg["fusion.beta"] if args.beta is None else args.beta
    weights = FusionWeights(alpha, beta)
    spa = _read_scores(args.spatial)
    tem = _read_scores(args.temporal)
    acc = _read_scores(args.accel)
    if not (spa.shape == tem.shape == acc.shape):
        raise LengthMismatch(
            f"score shapes differ: {spa.shape}, {tem.shape}, {acc.shape}"
        )
    fused = fuse_arrays(spa, tem, acc, weights)
    labels = fused.argmax(axis=1)
    lines = [
        ",".join(f"{float(v)!r}" for v in row) + f",{label}"
        for row, label in zip(fused, labels)
    ]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=None,
                        help="plain-text config file (key = value lines)")
    common.add_argument("--seed", type=_nonneg_int, default=0,
                        help="master seed; all PRNG streams derive from it")
    common.add_argument("--set", metavar="KEY=VALUE", action="append",
                        help="override one config key (repeatable)")

    parser = argparse.ArgumentParser(
        prog="accelstream",
        description="Flow, acceleration-image, and three-stream fusion pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("flow", parents=[common],
                       help="estimate flow for a frame directory")
    p.add_argument("--frames", required=True, help="input frame directory")
    p.add_argument("--pattern", default="*", help="frame filename glob")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("accel", parents=[common],
                       help="acceleration fields from .flo files")
    p.add_argument("--flows", required=True, help="directory of .flo files")
    p.add_argument("--mode", choices=("spatial", "temporal"), default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_accel)

    p = sub.add_parser("stack", parents=[common],
                       help="stack motion-image pairs into a volume")
    p.add_argument("--images", required=True,
                   help="directory of *_x.pgm / *_y.pgm pairs")
    p.add_argument("--start", type=_nonneg_int, default=0,
                   help="first pair index of the stack")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_stack)

    p = sub.add_parser("synth", parents=[common],
                       help="generate the synthetic 4-class benchmark")
    p.add_argument("--out", required=True, help="dataset output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", parents=[common],
                       help="train one stream classifier")
    p.add_argument("--data", required=True, help="dataset directory (with manifest)")
    p.add_argument("--stream", required=True,
                   choices=("spatial", "temporal", "accel"))
    p.add_argument("--out", required=True, help="model output file")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common],
                       help="evaluate three stream models on the test split")
    p.add_argument("--data", required=True, help="dataset directory (with manifest)")
    p.add_argument("--spatial", required=True, help="spatial model file")
    p.add_argument("--temporal", required=True, help="temporal model file")
    p.add_argument("--accel", required=True, help="acceleration model file")
    p.add_argument("--out", default=None,
                   help="report directory (report.txt / report.csv); stdout if omitted")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("fuse", parents=[common],
                       help="fuse three score files row by row")
    p.add_argument("--spatial", required=True, help="spatial score file")
    p.add_argument("--temporal", required=True, help="temporal score file")
    p.add_argument("--accel", required=True, help="acceleration score file")
    p.add_argument("--alpha", type=float, default=None,
                   help="temporal weight (defaults to fusion.alpha)")
    p.add_argument("--beta", type=float, default=None,
                   help="acceleration weight (defaults to fusion.beta)")
    p.add_argument("--out", default=None, help="output file; stdout if omitted")
    p.set_defaults(func=cmd_fuse)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from(args)
        return args.func(args, cfg)
    except AccelStreamError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
