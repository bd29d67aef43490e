"""Seeded, splittable randomness.

Every (repetition, purpose) pair gets its own PCG64 substream derived from a
master seed, so data, estimator coins and release noise never share state.
"""

import numpy as np

DATA = 0
COINS = 1
NOISE = 2
PROBE = 3


def substream(master_seed: int, rep: int = 0, purpose: int = DATA) -> np.random.Generator:
    if master_seed < 0:
        raise ValueError(f"seed must be non-negative, got {master_seed}")
    ss = np.random.SeedSequence(master_seed, spawn_key=(rep, purpose))
    return np.random.Generator(np.random.PCG64(ss))


def open_uniform(rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform draws on the open interval (0, 1); zeros are redrawn."""
    u = rng.random(size)
    zero = u == 0.0
    while zero.any():
        u[zero] = rng.random(int(zero.sum()))
        zero = u == 0.0
    return u
