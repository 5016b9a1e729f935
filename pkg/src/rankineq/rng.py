"""Seedable, splittable counter-based random streams.

Every stream is a Philox generator keyed by a ``SeedSequence`` built from a
root seed and an integer path, so a shard can regenerate any instance from
``(seed, cell, index)`` alone.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def make_rng(seed, *path):
    """Return a Philox ``Generator`` for ``seed`` and the sub-stream ``path``.

    An existing ``Generator`` is passed through untouched when no path is
    given, which lets helpers accept either form.
    """
    if isinstance(seed, np.random.Generator):
        if path:
            raise TypeError("cannot derive a sub-stream from a live Generator")
        return seed
    entropy = [int(seed) & _MASK64, *(int(p) & _MASK64 for p in path)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
