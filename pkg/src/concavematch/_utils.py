"""Small shared helpers."""

import numpy as np


def as_generator(seed=None):
    """Coerce ``seed`` (None, int, SeedSequence, or Generator) into a
    numpy Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def as_seed_sequence(seed=None):
    """Coerce ``seed`` (None, int, or SeedSequence) into a SeedSequence."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def as_float_matrix(values, name="matrix"):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    return arr
