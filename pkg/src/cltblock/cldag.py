"""CLDAG: local-DAG approximation of negative activation and its seed selector.

Each node v gets a positive and a negative local DAG holding the
in-influencers whose path influence on v reaches ``theta``.  Inside the
pair, a level-synchronous dynamic program gives ap-(v), the probability
that v turns negative.  The selector greedily adds the node with the
largest DecInf(u), the summed drop in ap-(v) over every v whose positive
LDAG contains u, and repairs DecInf incrementally after each pick.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from typing import Iterable, Literal

import numpy as np

from . import _kernels as K
from .graph import InfluenceGraph, _segment_ptr
from .selection import Selection
from .sim import check_seeds

DEFAULT_THETA = 0.01
REBUILD_BATCH = 512

Sign = Literal["+", "-"]


@dataclass(frozen=True, eq=False)
class Ldag:
    """One local DAG in topological order, root first.

    ``inf`` holds each member's influence on the root at the moment it was
    absorbed.  Arcs are stored as a local CSR: member ``i`` points at the
    local indices ``arc_tgt[arc_ptr[i]:arc_ptr[i+1]]``, all smaller than ``i``.
    """

    root: int
    sign: str
    nodes: np.ndarray
    inf: np.ndarray
    arc_ptr: np.ndarray
    arc_tgt: np.ndarray
    arc_w: np.ndarray

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def members(self) -> frozenset[int]:
        return frozenset(self.nodes.tolist())

    @property
    def arcs(self) -> list[tuple[int, int, float]]:
        out = []
        for i, u in enumerate(self.nodes):
            for e in range(self.arc_ptr[i], self.arc_ptr[i + 1]):
                out.append((int(u), int(self.nodes[self.arc_tgt[e]]), float(self.arc_w[e])))
        return out

    def influence(self) -> dict[int, float]:
        return dict(zip(self.nodes.tolist(), self.inf.tolist()))

    def is_topological(self) -> bool:
        src = np.repeat(np.arange(len(self.nodes)), np.diff(self.arc_ptr))
        return bool(np.all(self.arc_tgt < src))


@dataclass(frozen=True, eq=False)
class LdagTable:
    """LDAGs of many roots packed into flat arrays (row ``i`` belongs to ``roots[i]``)."""

    sign: str
    roots: np.ndarray
    mem_ptr: np.ndarray
    mem_idx: np.ndarray
    mem_inf: np.ndarray
    arc_ptr: np.ndarray
    arc_tgt: np.ndarray
    arc_w: np.ndarray

    def __len__(self) -> int:
        return len(self.roots)

    def sizes(self) -> np.ndarray:
        return np.diff(self.mem_ptr)

    def ldag(self, i: int) -> Ldag:
        a, b = self.mem_ptr[i], self.mem_ptr[i + 1]
        lo, hi = self.arc_ptr[a], self.arc_ptr[b]
        return Ldag(int(self.roots[i]), self.sign, self.mem_idx[a:b].copy(), self.mem_inf[a:b].copy(),
                    self.arc_ptr[a:b + 1] - lo, self.arc_tgt[lo:hi].copy(), self.arc_w[lo:hi].copy())

    @classmethod
    def from_ldags(cls, sign: str, ldags: list[Ldag]) -> "LdagTable":
        sizes = [len(d) for d in ldags]
        mem_ptr = np.concatenate(([0], np.cumsum(sizes))).astype(np.int64)
        arc_ptr, offset = [], 0
        for d in ldags:
            arc_ptr.append(d.arc_ptr[:-1] + offset)
            offset += d.arc_ptr[-1]
        arc_ptr.append(np.array([offset]))

        def cat(attr, dtype):
            parts = [getattr(d, attr) for d in ldags]
            return np.concatenate(parts).astype(dtype) if parts else np.zeros(0, dtype)

        return cls(sign, np.array([d.root for d in ldags], np.int64), mem_ptr,
                   cat("nodes", np.int64), cat("inf", np.float64),
                   np.concatenate(arc_ptr).astype(np.int64), cat("arc_tgt", np.int64), cat("arc_w", np.float64))


def _check_theta(theta: float) -> None:
    if not 0.0 < theta <= 1.0:
        raise ValueError("theta must lie in (0, 1]")


def build_ldag_table(g: InfluenceGraph, theta: float = DEFAULT_THETA, sign: Sign = "+",
                     roots: Iterable[int] | None = None) -> LdagTable:
    """Find-LDAG for every root (all nodes by default)."""
    _check_theta(theta)
    roots = np.arange(g.n, dtype=np.int64) if roots is None else np.asarray(list(roots), np.int64)
    w_in = g.w_plus if sign == "+" else g.w_neg
    w_out = g.out_w_plus if sign == "+" else g.out_w_neg
    arrays = K.build_ldags(g.n, roots, float(theta), g.in_ptr, g.src, w_in, g.out_ptr, g.out_dst, w_out)
    return LdagTable(sign, roots, *arrays)


def find_ldag(g: InfluenceGraph, v: int, theta: float = DEFAULT_THETA, sign: Sign = "+") -> Ldag:
    """Local DAG of ``v``: greedily absorb the node of largest influence on v while >= theta."""
    return build_ldag_table(g, theta, sign, [v]).ldag(0)


def degenerate_ldag_tables(g: InfluenceGraph, N0: Iterable[int],
                           keep: Literal["best", "all"] = "all") -> tuple[LdagTable, LdagTable]:
    """Single-hop LDAGs that reduce CLDAG to the proximity heuristic.

    LDAG+(v) = {v}.  LDAG-(v) holds v plus its negative-seed in-neighbours:
    all of them (``keep="all"``) or only the heaviest one (``keep="best"``,
    ties to the smaller id).
    """
    _, N0 = check_seeds(g, (), N0)
    is_n0 = np.zeros(g.n, bool)
    is_n0[N0] = True
    empty_ptr = np.zeros(2, np.int64)
    plus, neg = [], []
    for v in range(g.n):
        plus.append(Ldag(v, "+", np.array([v]), np.ones(1), empty_ptr[:2], np.zeros(0, np.int64), np.zeros(0)))
        ins = [(int(g.src[e]), float(g.w_neg[e])) for e in g.in_edges(v)
               if is_n0[g.src[e]] and g.w_neg[e] > 0]
        if keep == "best" and ins:
            ins = [min(ins, key=lambda t: (-t[1], t[0]))]
        nodes = np.array([v] + [u for u, _ in ins], np.int64)
        arc_ptr = np.concatenate(([0, 0], np.arange(1, len(ins) + 1))).astype(np.int64)
        neg.append(Ldag(v, "-", nodes, np.concatenate(([1.0], [w for _, w in ins])), arc_ptr,
                        np.zeros(len(ins), np.int64), np.array([w for _, w in ins], np.float64)))
    return LdagTable.from_ldags("+", plus), LdagTable.from_ldags("-", neg)


# ---------------------------------------------------------------------------
# pair dynamic program


class _Pair:
    """Positive and negative tables over the same roots, with the bookkeeping the DP needs."""

    def __init__(self, n: int, plus: LdagTable, neg: LdagTable):
        if not np.array_equal(plus.roots, neg.roots):
            raise ValueError("positive and negative tables must share roots")
        self.plus, self.neg = plus, neg
        self.p_cross = K.cross_maps(n, plus.mem_ptr, plus.mem_idx, neg.mem_ptr, neg.mem_idx)
        self.n_cross = K.cross_maps(n, neg.mem_ptr, neg.mem_idx, plus.mem_ptr, plus.mem_idx)
        width = max(int(plus.sizes().max(initial=1)), int(neg.sizes().max(initial=1)))
        self.fs = np.zeros((K.N_FLOAT_SCRATCH, width))
        self.js = np.zeros((K.N_INT_SCRATCH, width), np.int64)

    def has_neg(self, is_n0: np.ndarray) -> np.ndarray:
        if len(self.neg) == 0:
            return np.zeros(0, np.uint8)
        return np.maximum.reduceat(is_n0[self.neg.mem_idx], self.neg.mem_ptr[:-1]).astype(np.uint8)

    def args(self):
        p, q = self.plus, self.neg
        return (p.mem_ptr, p.mem_idx, p.arc_ptr, p.arc_tgt, p.arc_w, self.p_cross,
                q.mem_ptr, q.mem_idx, q.arc_ptr, q.arc_tgt, q.arc_w, self.n_cross)


@dataclass(frozen=True)
class DpSummary:
    """Totals of one DP run, keyed by member node."""

    ap_neg_root: float
    ap_plus: dict[int, float]
    ap_neg: dict[int, float]
    p_plus: dict[int, float]
    p_neg: dict[int, float]


def _single_pair(ldag_plus: Ldag, ldag_neg: Ldag, S, N0):
    if ldag_plus.root != ldag_neg.root:
        raise ValueError(f"LDAG roots differ: {ldag_plus.root} vs {ldag_neg.root}")
    S = np.asarray(sorted(set(S)), np.int64)
    N0 = np.asarray(sorted(set(N0)), np.int64)
    if np.intersect1d(S, N0).size:
        raise ValueError("positive and negative seed sets overlap")
    n = 1 + max(int(ldag_plus.nodes.max()), int(ldag_neg.nodes.max()),
                 int(S.max(initial=-1)), int(N0.max(initial=-1)))
    pair = _Pair(n, LdagTable.from_ldags("+", [ldag_plus]), LdagTable.from_ldags("-", [ldag_neg]))
    is_S = np.zeros(n, np.uint8)
    is_S[S] = 1
    is_n0 = np.zeros(n, np.uint8)
    is_n0[N0] = 1
    value = K.ldag_pair_dp(0, *pair.args(), is_S, is_n0, pair.fs, pair.js)
    return value, pair


def inf_cldag(v: int, ldag_plus: Ldag, ldag_neg: Ldag, S: Iterable[int], N0: Iterable[int]) -> float:
    """Probability that ``v`` ends negative, computed inside its LDAG pair.

    Seeds outside an LDAG are ignored for that side.
    """
    if ldag_plus.root != v:
        raise ValueError(f"LDAG is rooted at {ldag_plus.root}, not {v}")
    return float(_single_pair(ldag_plus, ldag_neg, S, N0)[0])


def inf_cldag_detail(ldag_plus: Ldag, ldag_neg: Ldag, S: Iterable[int], N0: Iterable[int]) -> DpSummary:
    value, pair = _single_pair(ldag_plus, ldag_neg, S, N0)
    fs, Lp, Ln = pair.fs, len(ldag_plus), len(ldag_neg)
    p_nodes, n_nodes = ldag_plus.nodes.tolist(), ldag_neg.nodes.tolist()
    return DpSummary(float(value),
                     dict(zip(p_nodes, fs[4, :Lp].tolist())), dict(zip(n_nodes, fs[9, :Ln].tolist())),
                     dict(zip(p_nodes, fs[0, :Lp].tolist())), dict(zip(n_nodes, fs[5, :Ln].tolist())))


# ---------------------------------------------------------------------------
# selector


def _inverse_membership(n: int, table: LdagTable) -> tuple[np.ndarray, np.ndarray]:
    """OutLS+: for node u, the table rows whose LDAG contains u (CSR)."""
    rows = np.repeat(np.arange(len(table), dtype=np.int64), table.sizes())
    return _invert(n, table.mem_idx, rows)


def _invert(n: int, members: np.ndarray, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    pairs = np.unique(np.stack([members, rows]), axis=1)
    return _segment_ptr(pairs[0], n), np.ascontiguousarray(pairs[1])


def _touching(n: int, plus: LdagTable, neg: LdagTable, roots_plus=None, roots_neg=None):
    """Rows whose LDAG+ or LDAG- contains u: every ap-(v, .) that a new seed u can move."""
    rp = np.repeat(np.arange(len(plus), dtype=np.int64) if roots_plus is None else roots_plus, plus.sizes())
    rn = np.repeat(np.arange(len(neg), dtype=np.int64) if roots_neg is None else roots_neg, neg.sizes())
    return np.concatenate([plus.mem_idx, neg.mem_idx]), np.concatenate([rp, rn])


class CldagSelector:
    """Incremental CLDAG state.

    With ``store_ldags`` every LDAG pair and every DecInf term is kept,
    so an update only re-runs the DP for rows containing the new seed.
    Without it only the inverse membership lists are stored and LDAGs are
    rebuilt on demand.

    A positive seed blocks negative flow wherever it sits, so the rows
    refreshed after a pick are those whose LDAG+ *or* LDAG- contains it;
    DecInf itself still only credits u for roots with u in LDAG+.
    """

    def __init__(self, g: InfluenceGraph, N0: Iterable[int], theta: float = DEFAULT_THETA,
                 store_ldags: bool = True, tables: tuple[LdagTable, LdagTable] | None = None):
        _check_theta(theta)
        _, N0 = check_seeds(g, (), N0)
        self.g, self.theta, self.N0 = g, theta, N0
        self.store_ldags = store_ldags or tables is not None
        self.is_S = np.zeros(g.n, np.uint8)
        self.is_n0 = np.zeros(g.n, np.uint8)
        self.is_n0[N0] = 1
        self.decinf = np.zeros(g.n)
        self.dp_calls = 0
        self.seeds: list[int] = []
        if self.store_ldags:
            plus, neg = tables if tables is not None else (
                build_ldag_table(g, theta, "+"), build_ldag_table(g, theta, "-"))
            self.pair = _Pair(g.n, plus, neg)
            self.has_neg = self.pair.has_neg(self.is_n0)
            self.delta = np.zeros(len(plus.mem_idx))
            self.ap_base = np.zeros(len(plus))
            self.outls_ptr, self.outls_rows = _inverse_membership(g.n, plus)
            self.touch_ptr, self.touch_rows = _invert(g.n, *_touching(g.n, plus, neg))
            self.dp_calls += K.decinf_accumulate(plus.roots, *self.pair.args(), self.has_neg, self.is_S,
                                                 self.is_n0, self.delta, self.ap_base, self.decinf,
                                                 self.pair.fs, self.pair.js)
        else:
            self.decinf, links = self._accumulate_batched(collect=True)
            self.touch_ptr, self.touch_rows = links

    def _batches(self, roots: np.ndarray):
        for a in range(0, len(roots), REBUILD_BATCH):
            part = roots[a:a + REBUILD_BATCH]
            yield _Pair(self.g.n, build_ldag_table(self.g, self.theta, "+", part),
                        build_ldag_table(self.g, self.theta, "-", part))

    def _accumulate_batched(self, collect: bool):
        decinf = np.zeros(self.g.n)
        members, owners = [], []
        for pair in self._batches(np.arange(self.g.n, dtype=np.int64)):
            delta = np.zeros(len(pair.plus.mem_idx))
            ap_base = np.zeros(len(pair.plus))
            self.dp_calls += K.decinf_accumulate(pair.plus.roots, *pair.args(), pair.has_neg(self.is_n0),
                                                 self.is_S, self.is_n0, delta, ap_base, decinf, pair.fs, pair.js)
            if collect:
                mem, own = _touching(self.g.n, pair.plus, pair.neg, pair.plus.roots, pair.neg.roots)
                members.append(mem)
                owners.append(own)
        if not collect:
            return decinf, None
        mem = np.concatenate(members) if members else np.zeros(0, np.int64)
        own = np.concatenate(owners) if owners else np.zeros(0, np.int64)
        return decinf, _invert(self.g.n, mem, own)

    def candidates(self) -> np.ndarray:
        return (self.is_S == 0) & (self.is_n0 == 0)

    def step(self) -> tuple[int, float] | None:
        """Select the best remaining node and fold it into S."""
        cand = self.candidates()
        if not cand.any():
            return None
        scores = np.where(cand, self.decinf, -np.inf)
        s = int(np.argmax(scores))
        gain = float(self.decinf[s])
        rows = self.touch_rows[self.touch_ptr[s]:self.touch_ptr[s + 1]]
        if self.store_ldags:
            self.dp_calls += K.decinf_update(s, rows, *self.pair.args(), self.has_neg, self.is_S, self.is_n0,
                                             self.delta, self.ap_base, self.decinf, self.pair.fs, self.pair.js)
        else:
            for pair in self._batches(rows):
                self.dp_calls += K.decinf_update_rebuilt(s, *pair.args(), pair.has_neg(self.is_n0), self.is_S,
                                                         self.is_n0, self.decinf, pair.fs, pair.js)
            self.is_S[s] = 1
        self.seeds.append(s)
        return s, gain

    def decinf_from_scratch(self) -> np.ndarray:
        """DecInf for the current S recomputed without incremental state."""
        if not self.store_ldags:
            return self._accumulate_batched(collect=False)[0]
        fresh = np.zeros(self.g.n)
        pair = self.pair
        K.decinf_accumulate(pair.plus.roots, *pair.args(), self.has_neg, self.is_S, self.is_n0,
                            np.zeros_like(self.delta), np.zeros_like(self.ap_base), fresh, pair.fs, pair.js)
        return fresh

    def stats_rows(self):
        """``(node, size_plus, size_neg, outls_size)`` per node (stored mode only)."""
        if not self.store_ldags:
            raise RuntimeError("LDAG sizes are only available when LDAGs are stored")
        outls = np.diff(self.outls_ptr)
        for i, v in enumerate(self.pair.plus.roots):
            yield (int(v), int(self.pair.plus.sizes()[i]), int(self.pair.neg.sizes()[i]), int(outls[v]))

    def write_stats(self, path, labels=None) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("node", "size_plus", "size_neg", "outls_size"))
            for v, a, b, c in self.stats_rows():
                w.writerow((labels(v) if labels else v, a, b, c))


def cldag_select(g: InfluenceGraph, N0: Iterable[int], k: int, theta: float = DEFAULT_THETA,
                 store_ldags: bool = True, tables: tuple[LdagTable, LdagTable] | None = None) -> Selection:
    """Pick up to ``k`` positive seeds by largest DecInf."""
    if k < 0:
        raise ValueError("k must be non-negative")
    t0 = time.perf_counter()
    sel = CldagSelector(g, N0, theta, store_ldags, tables)
    out = Selection("cldag")
    for _ in range(k):
        picked = sel.step()
        if picked is None:
            break
        out.record(picked[0], picked[1], sel.dp_calls, 1e3 * (time.perf_counter() - t0))
    return out
