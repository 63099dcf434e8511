"""Greedy blocking-seed selection, plain and lazy-forward (CELF).

Both selectors take an evaluator that maps a positive seed set to
σ_NIR.  The exact evaluator enumerates live-path configurations once and
reuses them; the Monte-Carlo evaluator redraws a fixed batch of live-path
samples at the start of every round so all candidates in a round are
compared on common random numbers.
"""

from __future__ import annotations

import heapq
import itertools
import time
from typing import Iterable, Protocol, Sequence

import numpy as np

from ._backend import USE_NUMBA
from .graph import InfluenceGraph
from .rng import SeedLike, chunks, resolve_seed, stream
from .selection import Selection
from .sim import ENUMERATION_LIMIT, Ensemble, _draw_parents, check_seeds, enumerate_live_paths

GAIN_DECIMALS = 12
CACHE_BYTES = 1 << 28


class Evaluator(Protocol):
    calls: int
    runs: int | None

    def begin_round(self, r: int) -> None: ...

    def value(self, S: Sequence[int]) -> float: ...


class ExactEvaluator:
    """σ_NIR by full enumeration; suitable for graphs of a dozen nodes or so."""

    runs = None

    def __init__(self, g: InfluenceGraph, N0: Iterable[int], limit: int = ENUMERATION_LIMIT):
        _, self.N0 = check_seeds(g, (), N0)
        self.g = g
        self.calls = 0
        self._ens = enumerate_live_paths(g, self.N0, limit)
        self._base = float(self._ens.weights @ self._ens.neg_counts((), self.N0))

    def begin_round(self, r: int) -> None:
        pass

    def value(self, S: Sequence[int]) -> float:
        self.calls += 1
        if len(S) == 0:
            return 0.0
        S, _ = check_seeds(self.g, S, self.N0)
        return self._base - float(self._ens.weights @ self._ens.neg_counts(S, self.N0))


class MonteCarloEvaluator:
    """σ_NIR averaged over ``runs`` live-path samples, resampled once per round.

    Samples for round ``r`` come from streams keyed by ``(seed, r, chunk)``.
    They are held in memory when they fit in ``cache_bytes``; otherwise each
    evaluation regenerates them from the same streams.
    """

    def __init__(self, g: InfluenceGraph, N0: Iterable[int], runs: int = 10000, rng: SeedLike = 0,
                 cache_bytes: int = CACHE_BYTES):
        if runs < 1:
            raise ValueError("runs must be >= 1")
        _, self.N0 = check_seeds(g, (), N0)
        self.g, self.runs, self.seed = g, runs, resolve_seed(rng)
        self.calls = 0
        self._round = None
        per_sample = g.n * (16 if USE_NUMBA else 8)
        self._cache_ok = runs * per_sample <= cache_bytes
        self._cached: list[Ensemble] | None = None
        self._base: list[np.ndarray] = []

    def _generate(self):
        for c, a, b in chunks(self.runs):
            yield Ensemble(*_draw_parents(self.g, stream(self.seed, "greedy", self._round, c), b - a))

    def _ensembles(self):
        return self._cached if self._cached is not None else self._generate()

    def begin_round(self, r: int) -> None:
        if r == self._round:
            return
        self._round = r
        self._cached = None
        if self._cache_ok:
            parts = list(self._generate())
            self._cached = [Ensemble(np.concatenate([e.pos for e in parts]),
                                     np.concatenate([e.neg for e in parts]))]
        self._base = [ens.neg_counts((), self.N0) for ens in self._ensembles()]

    def value(self, S: Sequence[int]) -> float:
        if self._round is None:
            self.begin_round(0)
        self.calls += 1
        if len(S) == 0:
            return 0.0
        S, _ = check_seeds(self.g, S, self.N0)
        total = 0
        for base, ens in zip(self._base, self._ensembles()):
            total += int(base.sum() - ens.neg_counts(S, self.N0).sum())
        return total / self.runs


def make_evaluator(g: InfluenceGraph, N0, evaluator: str | Evaluator = "mc", runs: int = 10000,
                   rng: SeedLike = 0) -> Evaluator:
    if evaluator == "exact":
        return ExactEvaluator(g, N0)
    if evaluator == "mc":
        return MonteCarloEvaluator(g, N0, runs, rng)
    if isinstance(evaluator, str):
        raise ValueError(f"unknown evaluator {evaluator!r}")
    return evaluator


def _gain(ev: Evaluator, S: list[int], v: int, base: float) -> float:
    return round(ev.value(S + [v]) - base, GAIN_DECIMALS)


def _candidates(g: InfluenceGraph, N0) -> list[int]:
    blocked = set(int(x) for x in N0)
    return [v for v in range(g.n) if v not in blocked]


def naive_greedy(g: InfluenceGraph, N0: Iterable[int], k: int, evaluator: str | Evaluator = "mc",
                 runs: int = 10000, rng: SeedLike = 0) -> Selection:
    """Evaluate every remaining candidate each round and keep the best."""
    if k < 0:
        raise ValueError("k must be non-negative")
    N0 = list(N0)
    ev = make_evaluator(g, N0, evaluator, runs, rng)
    out = Selection("greedy", runs=ev.runs)
    S: list[int] = []
    remaining = _candidates(g, N0)
    t0 = time.perf_counter()
    for r in range(min(k, len(remaining))):
        ev.begin_round(r)
        base = ev.value(S)
        best, best_gain = -1, -np.inf
        for v in remaining:
            gain = _gain(ev, S, v, base)
            if gain > best_gain:
                best, best_gain = v, gain
        S.append(best)
        remaining.remove(best)
        out.record(best, best_gain, ev.calls, 1e3 * (time.perf_counter() - t0))
    return out


def celf_greedy(g: InfluenceGraph, N0: Iterable[int], k: int, evaluator: str | Evaluator = "mc",
                runs: int = 10000, rng: SeedLike = 0) -> Selection:
    """Lazy-forward greedy: stale gains are upper bounds, refresh only the top."""
    if k < 0:
        raise ValueError("k must be non-negative")
    N0 = list(N0)
    ev = make_evaluator(g, N0, evaluator, runs, rng)
    out = Selection("celf", runs=ev.runs)
    S: list[int] = []
    heap = [(-np.inf, v, -1) for v in _candidates(g, N0)]
    heapq.heapify(heap)
    t0 = time.perf_counter()
    for r in range(min(k, len(heap))):
        ev.begin_round(r)
        base = ev.value(S)
        while True:
            neg_gain, v, last = heapq.heappop(heap)
            if last == r:
                break
            heapq.heappush(heap, (-_gain(ev, S, v, base), v, r))
        S.append(v)
        out.record(v, -neg_gain, ev.calls, 1e3 * (time.perf_counter() - t0))
    return out


def exhaustive_best(g: InfluenceGraph, N0: Iterable[int], k: int,
                    evaluator: str | Evaluator = "exact") -> tuple[tuple[int, ...], float]:
    """Best seed set of size ``min(k, candidates)`` by brute force."""
    N0 = list(N0)
    ev = make_evaluator(g, N0, evaluator)
    cand = _candidates(g, N0)
    best, best_val = (), 0.0
    for combo in itertools.combinations(cand, min(k, len(cand))):
        val = ev.value(list(combo))
        if val > best_val:
            best, best_val = combo, val
    return best, best_val
