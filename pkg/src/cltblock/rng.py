"""Deterministic random streams.

Runs are grouped into fixed-size chunks; chunk ``c`` of a named stage draws
from its own PCG64 stream keyed by ``(master_seed, stage, c)``.  A run's
randomness therefore depends only on the master seed and the run index,
never on how chunks are scheduled.
"""

from __future__ import annotations

import zlib
from typing import Iterator

import numpy as np

CHUNK = 256

SeedLike = int | np.random.Generator | None


def resolve_seed(rng: SeedLike) -> int:
    """Turn an int, a Generator or None into a master seed."""
    if rng is None:
        return 0
    if isinstance(rng, np.random.Generator):
        return int(rng.integers(0, 2**63 - 1))
    if isinstance(rng, (int, np.integer)) and rng >= 0:
        return int(rng)
    raise TypeError(f"expected a non-negative int seed or numpy Generator, got {rng!r}")


def stage_key(stage: str) -> int:
    return zlib.crc32(stage.encode("utf-8"))


def stream(seed: int, stage: str, *index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(stage_key(stage), *index))
    return np.random.Generator(np.random.PCG64(ss))


def chunks(runs: int, size: int = CHUNK) -> Iterator[tuple[int, int, int]]:
    """Yield ``(chunk_index, start, stop)`` covering ``range(runs)``."""
    for c, start in enumerate(range(0, runs, size)):
        yield c, start, min(start + size, runs)
