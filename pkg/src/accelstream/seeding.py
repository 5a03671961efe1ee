"""Deterministic PRNG stream derivation.

Every random draw in the package flows from one user-facing seed.  Each
consumer gets its own PCG64 generator keyed by (stream label, seed), so
adding draws to one consumer never perturbs another.  Stream labels are
fixed constants; the scheme is documented in the README.
"""

from __future__ import annotations

import numpy as np

INIT_STREAM = 11      # classifier weight init
DROPOUT_STREAM = 12   # dropout masks during training
SHUFFLE_STREAM = 13   # minibatch shuffling
SYNTH_STREAM = 14     # synthetic sequence generation
BENCH_STREAM = 15     # benchmark jitter (per-video motion parameters)


def derive_rng(stream: int, seed: int) -> np.random.Generator:
    """PCG64 generator for (stream, seed); same pair always gives same draws."""
    return np.random.default_rng([int(stream), int(seed)])
