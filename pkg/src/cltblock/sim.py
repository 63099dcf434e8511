"""CLT diffusion: threshold simulation, live-path sampling and estimators.

Two equivalent views of the model are implemented.  The threshold view
draws a positive and a negative threshold per node and runs synchronous
rounds.  The live-path view keeps at most one positive and one negative
in-edge per node; a node then copies the sign of whichever chosen parent
delivers a signal first, negative winning simultaneous arrivals, and only
nodes that actually hold a sign relay it.

Blocking is measured by the influence blocking set: nodes that turn
negative without positive seeds but not with them.  Because positive seeds
can only remove negative activations, ``|IBS(S)| = |neg(∅)| - |neg(S)|`` on
every realisation, which is how all estimators compute it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels as K
from ._backend import USE_NUMBA
from .graph import InfluenceGraph, TieRule
from .rng import CHUNK, SeedLike, chunks, resolve_seed, stream

ENUMERATION_LIMIT = 10**7


class SeedOverlapError(ValueError):
    """Positive and negative seed sets share a node."""


class EnumerationTooLarge(ValueError):
    """Exact enumeration would exceed :data:`ENUMERATION_LIMIT` configurations."""


def check_seeds(g: InfluenceGraph, S: Iterable[int], N0: Iterable[int]) -> tuple[np.ndarray, np.ndarray]:
    """Validate seed sets and return them as sorted int64 arrays."""
    pos = np.unique(np.fromiter((int(x) for x in S), dtype=np.int64))
    neg = np.unique(np.fromiter((int(x) for x in N0), dtype=np.int64))
    for arr in (pos, neg):
        if arr.size and (arr[0] < 0 or arr[-1] >= g.n):
            raise ValueError(f"seed ids must lie in [0, {g.n})")
    common = np.intersect1d(pos, neg)
    if common.size:
        raise SeedOverlapError(f"nodes {common.tolist()} are both positive and negative seeds")
    return pos, neg


@dataclass(frozen=True)
class DiffusionOutcome:
    plus_active: frozenset[int]
    neg_active: frozenset[int]
    steps: int

    @classmethod
    def from_states(cls, states: np.ndarray, steps: int) -> "DiffusionOutcome":
        return cls(frozenset(np.flatnonzero(states == 1).tolist()),
                   frozenset(np.flatnonzero(states == -1).tolist()), int(steps))


@dataclass(frozen=True)
class NirEstimate:
    mean: float
    std_error: float
    runs: int

    @classmethod
    def from_samples(cls, x: np.ndarray) -> "NirEstimate":
        x = np.asarray(x, dtype=np.float64)
        runs = len(x)
        se = float(x.std(ddof=1) / np.sqrt(runs)) if runs > 1 else 0.0
        return cls(float(x.mean()), se, runs)


@dataclass(frozen=True, eq=False)
class LivePathGraph:
    """Chosen positive / negative in-neighbour of every node (-1 for none)."""

    pos_choice: np.ndarray
    neg_choice: np.ndarray

    def __post_init__(self):
        for name in ("pos_choice", "neg_choice"):
            object.__setattr__(self, name, np.ascontiguousarray(getattr(self, name), dtype=np.int32))
        if self.pos_choice.shape != self.neg_choice.shape or self.pos_choice.ndim != 1:
            raise ValueError("choice arrays must be 1-D and of equal length")

    @classmethod
    def from_choices(cls, n: int, pos: dict[int, int] | None = None,
                     neg: dict[int, int] | None = None) -> "LivePathGraph":
        p = np.full(n, -1, np.int32)
        q = np.full(n, -1, np.int32)
        for v, u in (pos or {}).items():
            p[v] = u
        for v, u in (neg or {}).items():
            q[v] = u
        return cls(p, q)

    @property
    def n(self) -> int:
        return len(self.pos_choice)


# ---------------------------------------------------------------------------
# batched live-path machinery


def _draw_parents(g: InfluenceGraph, gen: np.random.Generator, R: int) -> tuple[np.ndarray, np.ndarray]:
    up = gen.random((R, g.n))
    un = gen.random((R, g.n))
    sampler = K.sample_parents if USE_NUMBA else K.sample_parents_np
    pos = sampler(g.in_ptr, g.src, g.cum_plus, up)
    neg = sampler(g.in_ptr, g.src, g.cum_neg, un)
    return pos, neg


class Ensemble:
    """A weighted batch of live-path graphs.

    Monte-Carlo batches carry equal weights; exact enumerations carry
    configuration probabilities.  Activation is run on the whole batch at
    once by the active backend.
    """

    def __init__(self, pos: np.ndarray, neg: np.ndarray, weights: np.ndarray | None = None):
        self.pos = np.ascontiguousarray(pos, dtype=np.int32)
        self.neg = np.ascontiguousarray(neg, dtype=np.int32)
        self.weights = None if weights is None else np.asarray(weights, dtype=np.float64)
        self._children = None

    def __len__(self) -> int:
        return self.pos.shape[0]

    @property
    def n(self) -> int:
        return self.pos.shape[1]

    def _csr(self):
        if self._children is None:
            self._children = (K.children_csr(self.pos), K.children_csr(self.neg))
        return self._children

    def activate(self, S: np.ndarray, N0: np.ndarray, keep_states: bool = False):
        """Return ``(neg_counts, steps, states_or_None)`` for every sample."""
        S = np.asarray(S, np.int64)
        N0 = np.asarray(N0, np.int64)
        if USE_NUMBA:
            (pptr, pidx), (nptr, nidx) = self._csr()
            counts, steps, states = K.bfs_activate(pptr, pidx, nptr, nidx, S, N0, keep_states)
            return counts, steps, (states if keep_states else None)
        states, steps = K.layered_states_np(self.pos, self.neg, S, N0)
        counts = (states == -1).sum(axis=1).astype(np.int64)
        return counts, steps, (states if keep_states else None)

    def neg_counts(self, S, N0) -> np.ndarray:
        return self.activate(S, N0)[0]


def sample_ensemble(g: InfluenceGraph, runs: int, seed: int, stage: str = "livepath",
                    start_chunk: int = 0) -> Ensemble:
    parts = [_draw_parents(g, stream(seed, stage, start_chunk + c), b - a) for c, a, b in chunks(runs)]
    if not parts:
        return Ensemble(np.zeros((0, g.n), np.int32), np.zeros((0, g.n), np.int32))
    return Ensemble(np.concatenate([p for p, _ in parts]), np.concatenate([q for _, q in parts]))


def _ensemble_chunks(g: InfluenceGraph, runs: int, seed: int, stage: str):
    for c, a, b in chunks(runs):
        yield Ensemble(*_draw_parents(g, stream(seed, stage, c), b - a))


# ---------------------------------------------------------------------------
# single realisations


def sample_live_path(g: InfluenceGraph, rng: SeedLike = None) -> LivePathGraph:
    """Draw one live-path graph: in-edge (u, v) is kept with probability w(u, v)."""
    gen = rng if isinstance(rng, np.random.Generator) else stream(resolve_seed(rng), "single")
    pos, neg = _draw_parents(g, gen, 1)
    return LivePathGraph(pos[0], neg[0])


def activation_from_live_path(lp: LivePathGraph, S: Iterable[int], N0: Iterable[int]) -> DiffusionOutcome:
    S = np.unique(np.fromiter(S, np.int64))
    N0 = np.unique(np.fromiter(N0, np.int64))
    if np.intersect1d(S, N0).size:
        raise SeedOverlapError("positive and negative seed sets overlap")
    ens = Ensemble(lp.pos_choice[None, :], lp.neg_choice[None, :])
    _, steps, states = ens.activate(S, N0, keep_states=True)
    return DiffusionOutcome.from_states(states[0], steps[0])


def ibs(lp: LivePathGraph, S: Iterable[int], N0: Iterable[int]) -> frozenset[int]:
    """Nodes negative under (∅, N0) but not under (S, N0) on this live-path graph."""
    N0 = list(N0)
    base = activation_from_live_path(lp, (), N0).neg_active
    return base - activation_from_live_path(lp, S, N0).neg_active


def _draw_thresholds(gen: np.random.Generator, R: int, n: int):
    return gen.random((R, n)), gen.random((R, n)), gen.random((R, n))


def _threshold_batch(g: InfluenceGraph, S, N0, thetas, random_tie: bool):
    tp, tn, coin = thetas
    if USE_NUMBA:
        return K.threshold_runs(g.out_ptr, g.out_dst, g.out_w_plus, g.out_w_neg,
                                tp, tn, coin, S, N0, random_tie)
    return K.threshold_runs_np(g.in_ptr, g.src, g.w_plus, g.w_neg, tp, tn, coin, S, N0, random_tie)


def simulate_clt(g: InfluenceGraph, S: Iterable[int], N0: Iterable[int],
                 tie: TieRule | str = TieRule.NEGATIVE_DOMINANCE, rng: SeedLike = None) -> DiffusionOutcome:
    """One realisation of the threshold process with fresh uniform thresholds."""
    S, N0 = check_seeds(g, S, N0)
    gen = rng if isinstance(rng, np.random.Generator) else stream(resolve_seed(rng), "single")
    thetas = _draw_thresholds(gen, 1, g.n)
    states, steps = _threshold_batch(g, S, N0, thetas, TieRule(tie) is TieRule.RANDOM)
    return DiffusionOutcome.from_states(states[0], steps[0])


def simulate_clt_batch(g: InfluenceGraph, S, N0, runs: int, rng: SeedLike = 0,
                       tie: TieRule | str = TieRule.NEGATIVE_DOMINANCE):
    """``runs`` threshold realisations; returns ``(states, steps)`` arrays."""
    S, N0 = check_seeds(g, S, N0)
    seed = resolve_seed(rng)
    random_tie = TieRule(tie) is TieRule.RANDOM
    out = [_threshold_batch(g, S, N0, _draw_thresholds(stream(seed, "threshold", c), b - a, g.n), random_tie)
           for c, a, b in chunks(runs)]
    return np.concatenate([s for s, _ in out]), np.concatenate([t for _, t in out])


# ---------------------------------------------------------------------------
# estimators


def _require_runs(runs: int) -> None:
    if runs < 1:
        raise ValueError("runs must be >= 1")


def nir_samples(g: InfluenceGraph, S, N0, runs: int, rng: SeedLike = 0) -> np.ndarray:
    """Per-run |IBS(S)| over live-path samples."""
    S, N0 = check_seeds(g, S, N0)
    _require_runs(runs)
    if S.size == 0 or N0.size == 0:
        return np.zeros(runs)
    seed = resolve_seed(rng)
    out = []
    for ens in _ensemble_chunks(g, runs, seed, "livepath"):
        out.append(ens.neg_counts((), N0) - ens.neg_counts(S, N0))
    return np.concatenate(out).astype(np.float64)


def estimate_nir(g: InfluenceGraph, S, N0, runs: int = 10000, rng: SeedLike = 0) -> NirEstimate:
    """Monte-Carlo σ_NIR(S) from live-path samples."""
    return NirEstimate.from_samples(nir_samples(g, S, N0, runs, rng))


def estimate_negative_spread(g: InfluenceGraph, S, N0, runs: int = 10000, rng: SeedLike = 0) -> NirEstimate:
    """Monte-Carlo σ_N(S, N0), the expected number of negative nodes."""
    S, N0 = check_seeds(g, S, N0)
    _require_runs(runs)
    seed = resolve_seed(rng)
    counts = [ens.neg_counts(S, N0) for ens in _ensemble_chunks(g, runs, seed, "livepath")]
    return NirEstimate.from_samples(np.concatenate(counts))


def estimate_nir_threshold(g: InfluenceGraph, S, N0, runs: int = 10000, rng: SeedLike = 0,
                           tie: TieRule | str = TieRule.NEGATIVE_DOMINANCE) -> NirEstimate:
    """σ_NIR(S) from the threshold process, pairing both runs on the same thresholds."""
    S, N0 = check_seeds(g, S, N0)
    _require_runs(runs)
    seed = resolve_seed(rng)
    random_tie = TieRule(tie) is TieRule.RANDOM
    out = []
    for c, a, b in chunks(runs):
        thetas = _draw_thresholds(stream(seed, "threshold", c), b - a, g.n)
        base, _ = _threshold_batch(g, np.zeros(0, np.int64), N0, thetas, random_tie)
        with_s, _ = _threshold_batch(g, S, N0, thetas, random_tie)
        out.append((base == -1).sum(axis=1) - (with_s == -1).sum(axis=1))
    return NirEstimate.from_samples(np.concatenate(out))


# ---------------------------------------------------------------------------
# exact enumeration


def _ancestors(g: InfluenceGraph, targets: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Nodes with a path of positive-weight edges into ``targets`` (targets included)."""
    mark = np.zeros(g.n, bool)
    mark[targets] = True
    stack = list(np.flatnonzero(mark))
    while stack:
        v = stack.pop()
        for e in g.in_edges(v):
            u = g.src[e]
            if w[e] > 0 and not mark[u]:
                mark[u] = True
                stack.append(u)
    return mark


def _negative_reach(g: InfluenceGraph, N0: np.ndarray) -> np.ndarray:
    mark = np.zeros(g.n, bool)
    mark[N0] = True
    stack = list(N0)
    w = g.out_w_neg
    while stack:
        u = stack.pop()
        for e in g.out_edges(u):
            v = g.out_dst[e]
            if w[e] > 0 and not mark[v]:
                mark[v] = True
                stack.append(v)
    return mark


def _options(g: InfluenceGraph, v: int, w: np.ndarray):
    parents, probs = [], []
    for e in g.in_edges(v):
        if w[e] > 0:
            parents.append(int(g.src[e]))
            probs.append(float(w[e]))
    rest = 1.0 - sum(probs)
    if rest > 1e-15:
        parents.append(-1)
        probs.append(rest)
    return np.array(parents, np.int32), np.array(probs)


def enumerate_live_paths(g: InfluenceGraph, N0: Iterable[int], limit: int = ENUMERATION_LIMIT) -> Ensemble:
    """Every live-path configuration that can influence the negative cascade.

    Choices that cannot change which nodes turn negative are marginalised:
    negative choices outside the negative reach of ``N0`` and positive
    choices at nodes that cannot relay into that reach.  The returned
    ensemble's weights are configuration probabilities summing to 1.
    """
    _, N0 = check_seeds(g, (), N0)
    reach = _negative_reach(g, N0) if N0.size else np.zeros(g.n, bool)
    pos_rel = _ancestors(g, np.flatnonzero(reach), g.w_plus) if reach.any() else reach
    slots = []
    for v in range(g.n):
        if pos_rel[v]:
            slots.append((v, 0, *_options(g, v, g.w_plus)))
        if reach[v]:
            slots.append((v, 1, *_options(g, v, g.w_neg)))
    slots = [s for s in slots if not (len(s[2]) == 1 and s[2][0] == -1)]
    sizes = [len(s[2]) for s in slots]
    total = int(np.prod(sizes, dtype=object)) if sizes else 1
    if total > limit:
        raise EnumerationTooLarge(f"{total} live-path configurations exceed the limit of {limit}")
    idx = np.arange(total, dtype=np.int64)
    pos = np.full((total, g.n), -1, np.int32)
    neg = np.full((total, g.n), -1, np.int32)
    prob = np.ones(total)
    for v, sign, parents, probs in slots:
        digit = idx % len(parents)
        idx //= len(parents)
        (pos if sign == 0 else neg)[:, v] = parents[digit]
        prob *= probs[digit]
    return Ensemble(pos, neg, prob)


def exact_nir(g: InfluenceGraph, S, N0, limit: int = ENUMERATION_LIMIT) -> float:
    """Exact σ_NIR(S) by enumerating live-path configurations."""
    S, N0 = check_seeds(g, S, N0)
    if S.size == 0 or N0.size == 0:
        return 0.0
    ens = enumerate_live_paths(g, N0, limit)
    return float(ens.weights @ (ens.neg_counts((), N0) - ens.neg_counts(S, N0)))


def exact_negative_spread(g: InfluenceGraph, S, N0, limit: int = ENUMERATION_LIMIT) -> float:
    S, N0 = check_seeds(g, S, N0)
    if N0.size == 0:
        return 0.0
    ens = enumerate_live_paths(g, N0, limit)
    return float(ens.weights @ ens.neg_counts(S, N0))


def exact_negative_probs(g: InfluenceGraph, S, N0, limit: int = ENUMERATION_LIMIT) -> np.ndarray:
    """Exact probability that each node ends up negative under (S, N0)."""
    S, N0 = check_seeds(g, S, N0)
    if N0.size == 0:
        return np.zeros(g.n)
    ens = enumerate_live_paths(g, N0, limit)
    _, _, states = ens.activate(S, N0, keep_states=True)
    return ens.weights @ (states == -1)


__all__ = [
    "CHUNK", "DiffusionOutcome", "Ensemble", "EnumerationTooLarge", "LivePathGraph", "NirEstimate",
    "SeedOverlapError", "activation_from_live_path", "check_seeds", "enumerate_live_paths",
    "estimate_negative_spread", "estimate_nir", "estimate_nir_threshold", "exact_negative_probs",
    "exact_negative_spread", "exact_nir", "ibs", "nir_samples", "sample_ensemble", "sample_live_path",
    "simulate_clt", "simulate_clt_batch",
]
