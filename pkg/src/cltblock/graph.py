"""Directed influence graphs with dual (positive / negative) edge weights.

Ingestion follows a simple pipeline::

    counts = load_edge_list("calls.txt")      # Digraph of interaction counts
    base = normalize_weights(counts)          # in-edge normalised weights
    g = apply_rates(base, RateConfig(1.0, 1.0))

Edges inside every graph object are stored sorted by ``(dst, src)`` so the
in-adjacency of node ``v`` is the contiguous slice ``in_ptr[v]:in_ptr[v+1]``.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

EPS = 1e-9


class GraphParseError(ValueError):
    """Malformed line in an edge-list file."""

    def __init__(self, path, lineno: int, line: str, reason: str):
        super().__init__(f"{path}:{lineno}: {reason}: {line.rstrip()!r}")
        self.lineno = lineno


class GraphValidationError(ValueError):
    """Graph data violates a structural or weight invariant."""


class TieRule(str, enum.Enum):
    NEGATIVE_DOMINANCE = "negative_dominance"
    RANDOM = "random"


@dataclass(frozen=True)
class RateConfig:
    """Propagation rates multiplied into the base weights.

    ``tie_rule`` decides simultaneous positive/negative activation in the
    threshold simulator.
    """

    p_plus: float = 1.0
    p_neg: float = 1.0
    tie_rule: TieRule = TieRule.NEGATIVE_DOMINANCE

    def __post_init__(self):
        for name in ("p_plus", "p_neg"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        object.__setattr__(self, "tie_rule", TieRule(self.tie_rule))


def _segment_ptr(keys: np.ndarray, n: int) -> np.ndarray:
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(keys, minlength=n), out=ptr[1:])
    return ptr


def _sorted_by_target(src, dst, *cols):
    order = np.lexsort((src, dst))
    return (src[order], dst[order]) + tuple(c[order] for c in cols)


def _check_structure(n: int, src: np.ndarray, dst: np.ndarray) -> None:
    if n < 0:
        raise GraphValidationError("node count must be non-negative")
    if src.shape != dst.shape or src.ndim != 1:
        raise GraphValidationError("src and dst must be 1-D arrays of equal length")
    if len(src) and (src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n):
        raise GraphValidationError("edge endpoint outside [0, n)")
    if len(src) > 1 and np.any(np.diff(dst * max(n, 1) + src) < 0):
        raise GraphValidationError("edges must be sorted by (dst, src); use from_edges")
    if np.any(src == dst):
        v = int(src[src == dst][0])
        raise GraphValidationError(f"self-loop on node {v}")
    if len(src) > 1:
        same = (src[1:] == src[:-1]) & (dst[1:] == dst[:-1])
        if same.any():
            i = int(np.flatnonzero(same)[0])
            raise GraphValidationError(f"duplicate edge ({src[i]}, {dst[i]})")


@dataclass(frozen=True, eq=False)
class Digraph:
    """Weighted digraph used for raw counts and for normalised base weights."""

    n: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    labels: tuple[str, ...] | None = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, float]],
                   labels: Sequence[str] | None = None) -> "Digraph":
        """Build from ``(u, v, weight)`` triples; duplicate pairs are summed."""
        acc: dict[tuple[int, int], float] = {}
        for u, v, w in edges:
            acc[(int(u), int(v))] = acc.get((int(u), int(v)), 0.0) + float(w)
        if acc:
            pairs = np.array(list(acc.keys()), dtype=np.int64)
            src, dst = pairs[:, 0], pairs[:, 1]
            weight = np.array(list(acc.values()), dtype=np.float64)
        else:
            src = dst = np.zeros(0, dtype=np.int64)
            weight = np.zeros(0, dtype=np.float64)
        src, dst, weight = _sorted_by_target(src, dst, weight)
        return cls(n, src, dst, weight, tuple(labels) if labels is not None else None)

    def __post_init__(self):
        _check_structure(self.n, self.src, self.dst)
        if np.any(self.weight < 0):
            raise GraphValidationError("negative edge weight/count")
        if self.labels is not None and len(self.labels) != self.n:
            raise GraphValidationError("labels must name every node")

    @property
    def m(self) -> int:
        return len(self.src)

    @cached_property
    def in_ptr(self) -> np.ndarray:
        return _segment_ptr(self.dst, self.n)

    def in_sums(self) -> np.ndarray:
        return np.bincount(self.dst, weights=self.weight, minlength=self.n)

    def label(self, v: int) -> str:
        return self.labels[v] if self.labels is not None else str(v)


@dataclass(frozen=True, eq=False)
class InfluenceGraph:
    """Directed graph whose edges carry a positive and a negative weight.

    Immutable after construction; kernels read the cached CSR views.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    w_plus: np.ndarray
    w_neg: np.ndarray
    labels: tuple[str, ...] | None = None

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int, float, float]],
                   labels: Sequence[str] | None = None) -> "InfluenceGraph":
        """Build from ``(u, v, w_plus, w_neg)`` tuples."""
        rows = list(edges)
        if rows:
            arr = np.array(rows, dtype=np.float64)
            src = arr[:, 0].astype(np.int64)
            dst = arr[:, 1].astype(np.int64)
            wp, wn = arr[:, 2].copy(), arr[:, 3].copy()
        else:
            src = dst = np.zeros(0, dtype=np.int64)
            wp = wn = np.zeros(0, dtype=np.float64)
        src, dst, wp, wn = _sorted_by_target(src, dst, wp, wn)
        return cls(n, src, dst, wp, wn, tuple(labels) if labels is not None else None)

    def __post_init__(self):
        for name in ("src", "dst"):
            object.__setattr__(self, name, np.ascontiguousarray(getattr(self, name), dtype=np.int64))
        for name in ("w_plus", "w_neg"):
            object.__setattr__(self, name, np.ascontiguousarray(getattr(self, name), dtype=np.float64))
        _check_structure(self.n, self.src, self.dst)
        for name in ("w_plus", "w_neg"):
            w = getattr(self, name)
            if w.shape != self.src.shape:
                raise GraphValidationError(f"{name} length mismatch")
            if np.any(w < 0) or np.any(~np.isfinite(w)):
                raise GraphValidationError(f"{name} must be finite and non-negative")
            sums = np.bincount(self.dst, weights=w, minlength=self.n)
            if np.any(sums > 1.0 + EPS):
                v = int(np.argmax(sums))
                raise GraphValidationError(f"{name} in-weights of node {v} sum to {sums[v]:.12g} > 1")
        if self.labels is not None and len(self.labels) != self.n:
            raise GraphValidationError("labels must name every node")

    @property
    def m(self) -> int:
        return len(self.src)

    @cached_property
    def in_ptr(self) -> np.ndarray:
        return _segment_ptr(self.dst, self.n)

    @cached_property
    def _out_order(self) -> np.ndarray:
        return np.lexsort((self.dst, self.src))

    @cached_property
    def out_ptr(self) -> np.ndarray:
        return _segment_ptr(self.src, self.n)

    @cached_property
    def out_dst(self) -> np.ndarray:
        return np.ascontiguousarray(self.dst[self._out_order])

    @cached_property
    def out_eid(self) -> np.ndarray:
        """Index into the in-sorted edge arrays for every out-sorted edge."""
        return np.ascontiguousarray(self._out_order.astype(np.int64))

    @cached_property
    def out_w_plus(self) -> np.ndarray:
        return np.ascontiguousarray(self.w_plus[self._out_order])

    @cached_property
    def out_w_neg(self) -> np.ndarray:
        return np.ascontiguousarray(self.w_neg[self._out_order])

    def _segment_cumsum(self, w: np.ndarray) -> np.ndarray:
        cum = np.cumsum(w)
        start = self.in_ptr[:-1]
        base = np.concatenate(([0.0], cum))[start]
        return cum - np.repeat(base, np.diff(self.in_ptr))

    @cached_property
    def cum_plus(self) -> np.ndarray:
        """Within-node running sums of positive in-weights (live-path sampling)."""
        return self._segment_cumsum(self.w_plus)

    @cached_property
    def cum_neg(self) -> np.ndarray:
        return self._segment_cumsum(self.w_neg)

    def in_sums(self, sign: str = "+") -> np.ndarray:
        w = self.w_plus if sign == "+" else self.w_neg
        return np.bincount(self.dst, weights=w, minlength=self.n)

    def degree(self) -> np.ndarray:
        """Total degree (in + out) of every node."""
        return (np.bincount(self.src, minlength=self.n)
                + np.bincount(self.dst, minlength=self.n))

    def in_edges(self, v: int) -> range:
        return range(int(self.in_ptr[v]), int(self.in_ptr[v + 1]))

    def out_edges(self, u: int) -> range:
        return range(int(self.out_ptr[u]), int(self.out_ptr[u + 1]))

    def weight(self, u: int, v: int, sign: str = "+") -> float:
        lo, hi = self.in_ptr[v], self.in_ptr[v + 1]
        i = lo + np.searchsorted(self.src[lo:hi], u)
        if i < hi and self.src[i] == u:
            return float((self.w_plus if sign == "+" else self.w_neg)[i])
        return 0.0

    def label(self, v: int) -> str:
        return self.labels[v] if self.labels is not None else str(v)

    def node_index(self) -> dict[str, int]:
        return {self.label(v): v for v in range(self.n)}


# ---------------------------------------------------------------------------
# ingestion


def load_edge_list(path, directed: bool = True) -> Digraph:
    """Parse ``source target [count]`` lines into a count digraph.

    Node ids are arbitrary tokens, re-indexed densely in order of first
    appearance.  ``#`` starts a comment.  A missing count means 1.
    Duplicate arcs are summed; undirected input emits both directions.
    """
    index: dict[str, int] = {}
    edges: list[tuple[int, int, float]] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) not in (2, 3):
                raise GraphParseError(path, lineno, line, "expected 'source target [count]'")
            if len(parts) == 3:
                try:
                    count = float(parts[2])
                except ValueError:
                    raise GraphParseError(path, lineno, line, "count is not a number") from None
                if not math.isfinite(count):
                    raise GraphParseError(path, lineno, line, "count is not finite")
                if count < 0:
                    raise GraphValidationError(f"{path}:{lineno}: negative count {count}")
            else:
                count = 1.0
            a, b = parts[0], parts[1]
            if a == b:
                raise GraphValidationError(f"{path}:{lineno}: self-loop on {a!r}")
            u = index.setdefault(a, len(index))
            v = index.setdefault(b, len(index))
            edges.append((u, v, count))
            if not directed:
                edges.append((v, u, count))
    return Digraph.from_edges(len(index), edges, labels=list(index))


def load_signed_edge_list(path) -> InfluenceGraph:
    """Parse ``source target w_plus w_neg`` lines as final influence weights.

    No normalisation or rate scaling is applied; the weights must already
    satisfy the in-weight bounds.
    """
    index: dict[str, int] = {}
    edges = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 4:
                raise GraphParseError(path, lineno, line, "expected 'source target w_plus w_neg'")
            try:
                wp, wn = float(parts[2]), float(parts[3])
            except ValueError:
                raise GraphParseError(path, lineno, line, "weight is not a number") from None
            a, b = parts[0], parts[1]
            if a == b:
                raise GraphValidationError(f"{path}:{lineno}: self-loop on {a!r}")
            edges.append((index.setdefault(a, len(index)), index.setdefault(b, len(index)), wp, wn))
    return InfluenceGraph.from_edges(len(index), edges, labels=list(index))


def write_signed_edge_list(path, g: InfluenceGraph) -> None:
    with open(path, "w") as fh:
        fh.write("# source target w_plus w_neg\n")
        for u, v, a, b in zip(g.src, g.dst, g.w_plus, g.w_neg):
            fh.write(f"{g.label(u)} {g.label(v)} {float(a)!r} {float(b)!r}\n")


def _fmt_count(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def write_edge_list(path, dg: Digraph) -> None:
    """Write ``source target count`` lines using the graph's external labels."""
    with open(path, "w") as fh:
        for u, v, w in zip(dg.src, dg.dst, dg.weight):
            fh.write(f"{dg.label(u)} {dg.label(v)} {_fmt_count(w)}\n")


def write_node_dictionary(path, labels: Sequence[str] | None, n: int) -> None:
    """Sidecar mapping: ``external_id internal_id`` per line."""
    with open(path, "w") as fh:
        for v in range(n):
            fh.write(f"{labels[v] if labels is not None else v} {v}\n")


def node_dictionary_path(edge_list_path) -> str:
    root, _ = os.path.splitext(str(edge_list_path))
    return root + ".nodes"


# ---------------------------------------------------------------------------
# weighting


def normalize_weights(raw: Digraph) -> Digraph:
    """Divide every count by the total count entering its target node."""
    totals = raw.in_sums()
    denom = totals[raw.dst]
    weight = np.divide(raw.weight, denom, out=np.zeros_like(raw.weight), where=denom > 0)
    return Digraph(raw.n, raw.src.copy(), raw.dst.copy(), weight, raw.labels)


def apply_rates(base: Digraph, cfg: RateConfig) -> InfluenceGraph:
    """Scale base weights into positive and negative weights."""
    sums = base.in_sums()
    if np.any(sums > 1.0 + EPS):
        raise GraphValidationError("base in-weights exceed 1; normalise first")
    return InfluenceGraph(base.n, base.src.copy(), base.dst.copy(),
                          cfg.p_plus * base.weight, cfg.p_neg * base.weight, base.labels)


def load_influence_graph(path, cfg: RateConfig | None = None, directed: bool = True) -> InfluenceGraph:
    return apply_rates(normalize_weights(load_edge_list(path, directed)), cfg or RateConfig())


def read_seed_file(path, g: InfluenceGraph) -> list[int]:
    """One external node id per line; blank lines and ``#`` comments ignored."""
    index = g.node_index()
    seeds = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            tok = line.split("#", 1)[0].strip()
            if not tok:
                continue
            if tok not in index:
                raise GraphParseError(path, lineno, line, "unknown node id")
            seeds.append(index[tok])
    return seeds


def write_seed_file(path, g: InfluenceGraph, seeds: Iterable[int]) -> None:
    with open(path, "w") as fh:
        for v in seeds:
            fh.write(f"{g.label(v)}\n")
