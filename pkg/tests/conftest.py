import numpy as np
import pytest

from cltblock.genlab import random_influence_graph
from cltblock.graph import InfluenceGraph
from cltblock.sim import EnumerationTooLarge, enumerate_live_paths

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def chain_graph() -> InfluenceGraph:
    """b(0) -> m(1) -> v(2) -> w(3) negative chain, blocker x(4) -> v positive; all weights 1."""
    return InfluenceGraph.from_edges(5, [(0, 1, 0, 1), (1, 2, 0, 1), (4, 2, 1, 0), (2, 3, 0, 1)])


@pytest.fixture
def chain():
    return chain_graph()


def small_corpus(count: int, n_lo: int = 4, n_hi: int = 8, seed: int = 0, limit: int = 200_000,
                 **kw):
    """Random enumerable instances ``(g, S, N0)``; draws are skipped when enumeration is too large."""
    rng = np.random.default_rng(seed)
    out, draw = [], 0
    while len(out) < count:
        draw += 1
        n = int(rng.integers(n_lo, n_hi + 1))
        g = random_influence_graph(n, seed * 100_003 + draw, edge_prob=kw.get("edge_prob", 0.4),
                                   max_in=kw.get("max_in", 2), sign_prob=kw.get("sign_prob", 1.0),
                                   dag=kw.get("dag", False))
        perm = rng.permutation(n)
        n_neg = int(rng.integers(1, 3))
        n_pos = int(rng.integers(1, 3))
        N0 = sorted(perm[:n_neg].tolist())
        S = sorted(perm[n_neg:n_neg + n_pos].tolist())
        try:
            enumerate_live_paths(g, N0, limit)
        except EnumerationTooLarge:
            continue
        out.append((g, S, N0))
    return out


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
