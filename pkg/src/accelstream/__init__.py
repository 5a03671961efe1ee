"""Acceleration-image motion pipeline.

Dense optical flow, quantized flow and acceleration images, stacked
motion volumes, small per-stream softmax classifiers, and weighted
three-stream score fusion, plus a synthetic-motion benchmark with
analytic ground truth.
"""

from .backend import current_backend, set_backend, using_numba
from .classifier import (
    LrSchedule,
    Model,
    ScoreVector,
    forward,
    gradient_check,
    init_model,
    load_model,
    lr_at,
    save_model,
    train,
)
from .config import Config, load_config
from .errors import AccelStreamError
from .flow import (
    FlowField,
    HsParams,
    endpoint_error,
    estimate_block_matching,
    estimate_horn_schunck,
    read_flo,
    write_flo,
)
from .frames import Frame, FrameSequence, load_frame, load_sequence, to_grayscale
from .frames import resize_bilinear as resize_frame
from .fusion import FusionWeights, evaluate, fuse, fuse_arrays, predict_video
from .motion import (
    AccelField,
    MotionImage,
    StackedVolume,
    accel_to_images,
    acceleration_spatial,
    acceleration_temporal,
    build_stack,
    dequantize,
    flow_to_images,
    quantize,
)
from .synth import BenchmarkVideo, GroundTruth, MotionSpec, generate, make_benchmark

__version__ = "0.1.0"

__all__ = [
    "AccelField",
    "AccelStreamError",
    "BenchmarkVideo",
    "Config",
    "FlowField",
    "Frame",
    "FrameSequence",
    "FusionWeights",
    "GroundTruth",
    "HsParams",
    "LrSchedule",
    "Model",
    "MotionImage",
    "MotionSpec",
    "ScoreVector",
    "StackedVolume",
    "accel_to_images",
    "acceleration_spatial",
    "acceleration_temporal",
    "build_stack",
    "current_backend",
    "dequantize",
    "endpoint_error",
    "estimate_block_matching",
    "estimate_horn_schunck",
    "evaluate",
    "flow_to_images",
    "forward",
    "fuse",
    "fuse_arrays",
    "generate",
    "gradient_check",
    "init_model",
    "load_config",
    "load_frame",
    "load_model",
    "load_sequence",
    "lr_at",
    "make_benchmark",
    "predict_video",
    "quantize",
    "read_flo",
    "resize_frame",
    "save_model",
    "set_backend",
    "to_grayscale",
    "train",
    "using_numba",
    "write_flo",
]
