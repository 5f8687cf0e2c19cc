"""Seed-stable random streams.

Philox is counter based, so a (seed, purpose, salt) triple always yields the
same uint64 stream regardless of how many draws other consumers made.  Every
randomized decision in the package flows through here.
"""
from __future__ import annotations

import numpy as np

from .rationals import mix64

_MASK64 = (1 << 64) - 1

TAG_ROUNDING = 1
TAG_UNIFORM_POINTS = 2
TAG_RANDOM_LINES = 3
TAG_PROBE = 4


def u64_stream(seed: int, tag: int, count: int, salt: int = 0) -> np.ndarray:
    """`count` uniform uint64 draws for the given (seed, tag, salt) stream."""
    key = [int(seed) & _MASK64, mix64(tag, salt)]
    gen = np.random.Generator(np.random.Philox(key=key))
    return gen.integers(0, 1 << 64, size=count, dtype=np.uint64, endpoint=False)
