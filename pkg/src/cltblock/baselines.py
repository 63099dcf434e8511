"""Simple seed-selection baselines: degree, random and proximity."""

from __future__ import annotations

from typing import Iterable, Literal

import numpy as np

from .graph import InfluenceGraph
from .rng import SeedLike, resolve_seed, stream
from .selection import candidates_mask
from .sim import check_seeds


def _ranked(scores: np.ndarray, mask: np.ndarray, k: int) -> list[int]:
    """Top-k masked nodes by score, ties to the smaller id."""
    idx = np.flatnonzero(mask)
    order = np.lexsort((idx, -scores[idx]))
    return idx[order[:max(k, 0)]].tolist()


def degree_heuristic(g: InfluenceGraph, N0: Iterable[int], k: int, exclude: Iterable[int] = ()) -> list[int]:
    """Highest total degree first."""
    _, N0 = check_seeds(g, (), N0)
    return _ranked(g.degree().astype(np.float64), candidates_mask(g.n, N0, exclude), k)


def random_heuristic(g: InfluenceGraph, N0: Iterable[int], k: int, rng: SeedLike = 0) -> list[int]:
    """Uniform sample without replacement from the non-negative-seed nodes."""
    _, N0 = check_seeds(g, (), N0)
    gen = rng if isinstance(rng, np.random.Generator) else stream(resolve_seed(rng), "random-baseline")
    pool = np.flatnonzero(candidates_mask(g.n, N0))
    return gen.choice(pool, size=min(max(k, 0), len(pool)), replace=False).tolist()


def proximity_scores(g: InfluenceGraph, N0: Iterable[int],
                     aggregate: Literal["sum", "max"] = "sum") -> dict[int, float]:
    """Negative weight reaching each direct out-neighbour of the negative seeds."""
    _, N0 = check_seeds(g, (), N0)
    is_n0 = np.zeros(g.n, bool)
    is_n0[N0] = True
    scores: dict[int, float] = {}
    for e in np.flatnonzero(is_n0[g.src] & ~is_n0[g.dst]):
        v, w = int(g.dst[e]), float(g.w_neg[e])
        if aggregate == "sum":
            scores[v] = scores.get(v, 0.0) + w
        elif aggregate == "max":
            scores[v] = max(scores.get(v, 0.0), w)
        else:
            raise ValueError(f"unknown aggregate {aggregate!r}")
    return scores


def proximity_heuristic(g: InfluenceGraph, N0: Iterable[int], k: int,
                        aggregate: Literal["sum", "max"] = "sum") -> list[int]:
    """Out-neighbours of N0 ranked by incoming negative weight, topped up by degree."""
    N0 = list(N0)
    scores = proximity_scores(g, N0, aggregate)
    picked = sorted(scores, key=lambda v: (-scores[v], v))[:max(k, 0)]
    if len(picked) < k:
        picked += degree_heuristic(g, N0, k - len(picked), exclude=picked)
    return picked
