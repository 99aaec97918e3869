"""Reproducible random streams.

Every stream is a Philox counter-based generator keyed by ``(seed, *keys)``
through :class:`numpy.random.SeedSequence`, so replicate ``i`` of a study gets
the same draws whatever order or process it runs in.
"""

import numpy as np


def generator(seed=0, *keys: int) -> np.random.Generator:
    """Return the stream for ``(seed, *keys)``; a Generator passes through."""
    if isinstance(seed, np.random.Generator):
        return seed
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(seq))


def open_uniform(gen: np.random.Generator, size) -> np.ndarray:
    """Uniform draws on the open interval (0, 1)."""
    # random() returns k / 2^53; the half-step offset keeps 0 out, and the
    # top draw would round up to 1, so it is held just below
    return np.minimum(gen.random(size) + 2.0 ** -54, 1.0 - 2.0 ** -53)
