"""Deterministic substream derivation for all randomized routines.

Every stochastic component draws from a counter-based Philox generator whose
key is derived from a root seed plus a tuple of integer tags (purpose code,
model index, node index, ...).  Two calls with the same (seed, tags) always
yield identical streams, independent of call order, platform, or thread
count, which is what makes simulation benches byte-reproducible.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["substream"]


def _tag_to_int(tag) -> int:
    if isinstance(tag, (int, np.integer)):
        return int(tag) & 0xFFFFFFFF
    if isinstance(tag, str):
        return zlib.crc32(tag.encode("utf-8"))
    raise TypeError(f"stream tag must be int or str, got {type(tag)!r}")


def substream(seed: int, *tags) -> np.random.Generator:
    """Return a Generator for the substream identified by ``(seed, *tags)``.

    Parameters
    ----------
    seed : int
        Root seed (any Python int >= 0).
    *tags : int or str
        Purpose/index tags, e.g. ``substream(7, "data", 3, 0)``.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_tag_to_int(t) for t in tags]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
