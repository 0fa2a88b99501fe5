"""Deterministic seed splitting shared by every stochastic routine.

Rule: a child stream is identified by a master seed plus an integer path,
``substream(seed, i, j, ...)``. Distinct paths give statistically
independent streams; the same (seed, path) always gives the same stream.
Monte Carlo loops use the replication index as the path so that any
replication can be reproduced in isolation, and nested algorithms extend
the path instead of drawing from a shared stream.
"""

import numpy as np


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return the generator for child stream (seed; path)."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(path))
    return np.random.default_rng(ss)
