"""Graph generators: power-law inputs, small random corpora and the vertex-cover gadget."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .graph import Digraph, InfluenceGraph, RateConfig, apply_rates, normalize_weights
from .rng import SeedLike, resolve_seed, stream

MAX_GADGET_BASE = 12


def _gen(rng: SeedLike, stage: str) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else stream(resolve_seed(rng), stage)


# ---------------------------------------------------------------------------
# power-law graphs


def power_law_degrees(n: int, exponent: float, gen: np.random.Generator) -> np.ndarray:
    """Degrees drawn from P(d) ∝ d^-exponent on 1..n-1."""
    support = np.arange(1, max(n, 2))
    pmf = support.astype(np.float64) ** -exponent
    return gen.choice(support, size=n, p=pmf / pmf.sum())


def gen_power_law(n: int, exponent: float = 2.16, rng: SeedLike = 0, max_tries: int = 20) -> Digraph:
    """Erased configuration model on a power-law degree sequence.

    Stubs are paired uniformly; self-loops and repeated pairs are dropped.
    Every surviving pair becomes two arcs of count 1, and weights are then
    normalised over in-edges.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if exponent <= 1:
        raise ValueError("exponent must exceed 1")
    gen = _gen(rng, "power-law")
    for _ in range(max_tries):
        deg = power_law_degrees(n, exponent, gen)
        if deg.sum() % 2:
            deg[gen.integers(n)] += 1
        stubs = gen.permutation(np.repeat(np.arange(n), deg))
        u, v = stubs[0::2], stubs[1::2]
        keep = u != v
        pairs = np.unique(np.stack([np.minimum(u, v), np.maximum(u, v)])[:, keep], axis=1)
        if pairs.shape[1]:
            edges = [(int(a), int(b), 1.0) for a, b in pairs.T] + [(int(b), int(a), 1.0) for a, b in pairs.T]
            return normalize_weights(Digraph.from_edges(n, edges))
    raise RuntimeError(f"no edges after {max_tries} attempts; degree sequence degenerate")


def power_law_graph(n: int, exponent: float = 2.16, rng: SeedLike = 0,
                    cfg: RateConfig | None = None) -> InfluenceGraph:
    return apply_rates(gen_power_law(n, exponent, rng), cfg or RateConfig())


def degree_slope(degrees: np.ndarray, d_min: int = 2) -> float:
    """Log-log slope of the degree density, from logarithmically binned counts."""
    d = np.asarray(degrees)
    d = d[d >= d_min]
    if d.size == 0:
        return float("nan")
    edges = d_min * 2.0 ** np.arange(0, math.ceil(math.log2(d.max() / d_min + 1)) + 1)
    counts, _ = np.histogram(d, bins=edges)
    width = np.diff(edges)
    centre = np.sqrt(edges[:-1] * np.maximum(edges[1:] - 1, edges[:-1]))
    ok = counts > 0
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(centre[ok]), np.log(counts[ok] / width[ok]), 1)[0])


def max_degree_seeds(g: InfluenceGraph, count: int) -> list[int]:
    """The ``count`` highest total-degree nodes (ties to the smaller id)."""
    deg = g.degree()
    return np.lexsort((np.arange(g.n), -deg))[:count].tolist()


# ---------------------------------------------------------------------------
# small random corpora


def _split(gen: np.random.Generator, k: int, total: float) -> np.ndarray:
    return gen.dirichlet(np.ones(k)) * total if k else np.zeros(0)


def random_influence_graph(n: int, rng: SeedLike = 0, edge_prob: float = 0.35, max_in: int = 3,
                           dag: bool = False, min_mass: float = 0.5, sign_prob: float = 1.0) -> InfluenceGraph:
    """Random sparse graph with independent positive and negative in-weights.

    Each node keeps at most ``max_in`` in-neighbours; its in-weights per sign
    sum to a uniform value in ``[min_mass, 1]``.  Each arc carries a given
    sign with probability ``sign_prob`` (at least one sign always).  With
    ``dag`` arcs only go from lower to higher ids.
    """
    gen = _gen(rng, "random-graph")
    edges = []
    for v in range(n):
        pool = np.arange(v) if dag else np.delete(np.arange(n), v)
        chosen = pool[gen.random(len(pool)) < edge_prob]
        if len(chosen) > max_in:
            chosen = gen.choice(chosen, size=max_in, replace=False)
        k = len(chosen)
        has_p = gen.random(k) < sign_prob
        has_n = (gen.random(k) < sign_prob) | ~has_p
        wp = np.zeros(k)
        wn = np.zeros(k)
        wp[has_p] = _split(gen, int(has_p.sum()), gen.uniform(min_mass, 1.0))
        wn[has_n] = _split(gen, int(has_n.sum()), gen.uniform(min_mass, 1.0))
        edges += [(int(u), v, float(a), float(b)) for u, a, b in zip(chosen, wp, wn)]
    return InfluenceGraph.from_edges(n, edges)


# ---------------------------------------------------------------------------
# vertex-cover gadget


@dataclass(frozen=True)
class BaseGraph:
    """Undirected simple graph on nodes 0..n-1."""

    n: int
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "BaseGraph":
        seen = set()
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop at {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) out of range")
            seen.add((min(a, b), max(a, b)))
        return cls(n, tuple(sorted(seen)))

    @classmethod
    def from_digraph(cls, dg: Digraph) -> "BaseGraph":
        return cls.from_edges(dg.n, zip(dg.src.tolist(), dg.dst.tolist()))

    def degrees(self) -> np.ndarray:
        d = np.zeros(self.n, np.int64)
        for a, b in self.edges:
            d[a] += 1
            d[b] += 1
        return d

    def neighbours(self) -> list[list[int]]:
        nb = [[] for _ in range(self.n)]
        for a, b in self.edges:
            nb[a].append(b)
            nb[b].append(a)
        return nb


@dataclass(frozen=True)
class GadgetSpec:
    base: BaseGraph
    d_max: int
    ell: int
    tops: tuple[int, ...]
    intermediates: tuple[tuple[int, ...], ...]
    bottoms: tuple[int, ...]
    chains: tuple[tuple[int, ...], ...]

    @property
    def spindle_count(self) -> int:
        return self.base.n

    @property
    def node_count(self) -> int:
        V = self.base.n
        return V * (V + 2) + V * self.ell

    @property
    def threshold(self) -> int:
        """σ_NIR reachable only by seeding a vertex cover."""
        return self.base.n * (self.ell + 1)


def chain_length(n: int, d_max: int) -> int:
    # exact rational ceiling of n*d_max/(n-1) - 1
    return -((-(n * d_max - (n - 1))) // (n - 1))


def build_np_gadget(base: BaseGraph) -> tuple[InfluenceGraph, list[int], GadgetSpec]:
    """Spindle-and-chain construction turning vertex cover into blocking.

    Per base vertex: a negative-seed top feeding |V| intermediates with
    weight 1, each feeding the bottom with weight 1/|V|; bottoms are joined
    along base edges in both directions with positive weight 1/deg; a
    negative chain of ℓ weight-1 arcs hangs off every bottom.
    """
    V = base.n
    if V < 2:
        raise ValueError("base graph needs at least two vertices")
    deg = base.degrees()
    if np.any(deg == 0):
        raise ValueError(f"base vertex {int(np.argmin(deg))} is isolated")
    d_max = int(deg.max())
    ell = chain_length(V, d_max)
    block = V + 2
    tops = tuple(i * block for i in range(V))
    inter = tuple(tuple(range(i * block + 1, i * block + 1 + V)) for i in range(V))
    bottoms = tuple(i * block + V + 1 for i in range(V))
    first_chain = V * block
    chains = tuple((bottoms[i],) + tuple(range(first_chain + i * ell, first_chain + (i + 1) * ell))
                   for i in range(V))
    labels = [""] * (V * block + V * ell)
    edges = []
    for i in range(V):
        labels[tops[i]] = f"top{i}"
        labels[bottoms[i]] = f"bot{i}"
        for j, m in enumerate(inter[i]):
            labels[m] = f"mid{i}_{j}"
            edges.append((tops[i], m, 0.0, 1.0))
            edges.append((m, bottoms[i], 0.0, 1.0 / V))
        for t in range(1, ell + 1):
            labels[chains[i][t]] = f"chain{i}_{t}"
            edges.append((chains[i][t - 1], chains[i][t], 0.0, 1.0))
    for a, b in base.edges:
        edges.append((bottoms[a], bottoms[b], 1.0 / deg[b], 0.0))
        edges.append((bottoms[b], bottoms[a], 1.0 / deg[a], 0.0))
    g = InfluenceGraph.from_edges(len(labels), edges, labels)
    return g, list(tops), GadgetSpec(base, d_max, ell, tops, inter, bottoms, chains)


def gadget_nir(spec: GadgetSpec, seeds: Iterable[int]) -> float:
    """Exact σ_NIR of a set of bottom-node seeds.

    A seeded bottom saves itself and its chain.  An unseeded bottom j turns
    positive in round 1 with probability s_j/d_j (s_j = seeded neighbours);
    otherwise negative weight 1 arrives in round 2 and wins, so its chain is
    lost too.
    """
    idx = {b: i for i, b in enumerate(spec.bottoms)}
    chosen = set()
    for s in seeds:
        if s not in idx:
            raise ValueError(f"node {s} is not a bottom node")
        chosen.add(idx[s])
    deg = spec.base.degrees()
    nb = spec.base.neighbours()
    saved = 0.0
    for j in range(spec.base.n):
        if j in chosen:
            saved += 1.0
        else:
            saved += sum(1 for x in nb[j] if x in chosen) / deg[j]
    return saved * (spec.ell + 1)


def has_vertex_cover(base: BaseGraph, k: int) -> bool:
    for size in range(min(k, base.n) + 1):
        for combo in itertools.combinations(range(base.n), size):
            cover = set(combo)
            if all(a in cover or b in cover for a, b in base.edges):
                return True
    return False


def check_gadget_vc(base: BaseGraph, k: int) -> tuple[bool, bool]:
    """(vertex cover of size <= k exists, some k bottom seeds reach |V|(ℓ+1))."""
    if base.n > MAX_GADGET_BASE:
        raise ValueError(f"base graph too large for exhaustive search (> {MAX_GADGET_BASE} nodes)")
    _, _, spec = build_np_gadget(base)
    target = spec.threshold - 1e-9
    met = any(gadget_nir(spec, combo) >= target
              for combo in itertools.combinations(spec.bottoms, min(k, base.n)))
    return has_vertex_cover(base, k), met


def random_base_graph(n: int, rng: SeedLike = 0, edge_prob: float = 0.4) -> BaseGraph:
    """Random simple graph without isolated vertices (a spanning path is forced when needed)."""
    gen = _gen(rng, "base-graph")
    edges = {(a, b) for a, b in itertools.combinations(range(n), 2) if gen.random() < edge_prob}
    deg = np.zeros(n, int)
    for a, b in edges:
        deg[a] += 1
        deg[b] += 1
    order = gen.permutation(n)
    for i, v in enumerate(order):
        if deg[v] == 0:
            u = order[i - 1] if i > 0 else order[1]
            edges.add((min(u, v), max(u, v)))
            deg[u] += 1
            deg[v] += 1
    return BaseGraph.from_edges(n, edges)

