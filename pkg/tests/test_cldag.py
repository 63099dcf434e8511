import numpy as np
import pytest

from cltblock.baselines import proximity_heuristic
from cltblock.cldag import (CldagSelector, build_ldag_table, cldag_select, degenerate_ldag_tables, find_ldag,
                            inf_cldag, inf_cldag_detail)
from cltblock.genlab import random_influence_graph
from cltblock.graph import InfluenceGraph
from cltblock.sim import exact_negative_probs

from conftest import chain_graph

TINY = 1e-12


def half_chain():
    # a(0) -> b(1) -> v(2), weight 0.5 on both signs
    return InfluenceGraph.from_edges(3, [(0, 1, .5, .5), (1, 2, .5, .5)])


def test_find_ldag_chain():
    ld = find_ldag(half_chain(), 2, 0.2)
    assert ld.nodes.tolist() == [2, 1, 0]
    assert ld.influence() == {2: 1.0, 1: 0.5, 0: 0.25}
    assert sorted(ld.arcs) == [(0, 1, 0.5), (1, 2, 0.5)]


def test_find_ldag_threshold_cuts():
    assert find_ldag(half_chain(), 2, 0.3).members == {1, 2}
    assert find_ldag(half_chain(), 2, 1.0).members == {2}
    with pytest.raises(ValueError):
        find_ldag(half_chain(), 2, 0.0)


def test_ldags_are_topological_and_above_threshold():
    g = random_influence_graph(40, 3, edge_prob=0.1)
    for sign in "+-":
        table = build_ldag_table(g, 0.05, sign)
        for i in range(len(table)):
            ld = table.ldag(i)
            assert ld.nodes[0] == ld.root and ld.is_topological()
            assert (ld.inf >= 0.05 - TINY).all()


def test_star_simultaneous_arrival():
    # a in N0 -> v (w_neg .5), d in S -> v (w_plus .6)
    g = InfluenceGraph.from_edges(3, [(0, 2, 0.0, 0.5), (1, 2, 0.6, 0.0)])
    lp, ln = find_ldag(g, 2, 0.01, "+"), find_ldag(g, 2, 0.01, "-")
    assert inf_cldag(2, lp, ln, [1], [0]) == pytest.approx(0.5, abs=1e-12)


def test_two_hop_positive_first():
    # a(0) -> m(1) -> v(2) negative, d(3) -> v positive
    g = InfluenceGraph.from_edges(4, [(0, 1, 0.0, 1.0), (1, 2, 0.0, 0.8), (3, 2, 0.6, 0.0)])
    lp, ln = find_ldag(g, 2, 0.01, "+"), find_ldag(g, 2, 0.01, "-")
    det = inf_cldag_detail(lp, ln, [3], [0])
    assert det.ap_plus[2] == pytest.approx(0.6, abs=1e-12)
    assert det.ap_neg_root == pytest.approx(0.32, abs=1e-12)


def test_mismatched_roots_rejected():
    g = half_chain()
    with pytest.raises(ValueError):
        inf_cldag(2, find_ldag(g, 2), find_ldag(g, 1, sign="-"), [], [0])


def lt_probability(ld, N0):
    """Linear-threshold activation of the root inside one LDAG: solve ap = A ap + b."""
    idx = {int(u): i for i, u in enumerate(ld.nodes)}
    L = len(ld.nodes)
    A = np.zeros((L, L))
    b = np.zeros(L)
    for u, x, w in ld.arcs:
        A[idx[x], idx[u]] += w
    for u in N0:
        if u in idx:
            A[idx[u]] = 0.0
            b[idx[u]] = 1.0
    return np.linalg.solve(np.eye(L) - A, b)[0]


def test_empty_positive_set_is_linear_threshold():
    for seed in range(25):
        g = random_influence_graph(14, seed, edge_prob=0.25)
        N0 = [0, 5]
        for v in range(1, g.n):
            if v in N0:
                continue
            lp, ln = find_ldag(g, v, 0.001, "+"), find_ldag(g, v, 0.001, "-")
            assert inf_cldag(v, lp, ln, [], N0) == pytest.approx(lt_probability(ln, N0), abs=1e-9)


def test_dp_exact_on_in_forests():
    # one in-neighbour per node: no shared ancestry, so the DP's independence holds
    checked = 0
    for seed in range(60):
        g = random_influence_graph(10, seed, edge_prob=0.5, max_in=1, dag=True)
        N0, S = [0, 1], [2, 4]
        exact = exact_negative_probs(g, S, N0)
        for v in range(g.n):
            if v in N0 or v in S:
                continue
            lp, ln = find_ldag(g, v, 1e-9, "+"), find_ldag(g, v, 1e-9, "-")
            assert inf_cldag(v, lp, ln, S, N0) == pytest.approx(exact[v], abs=1e-9)
            checked += 1
    assert checked > 300


def test_dp_probabilities_bounded():
    g = random_influence_graph(30, 7, edge_prob=0.2)
    for v in range(3, g.n):
        lp, ln = find_ldag(g, v, 0.01, "+"), find_ldag(g, v, 0.01, "-")
        det = inf_cldag_detail(lp, ln, [1, 2], [0])
        for table in (det.ap_plus, det.ap_neg, det.p_plus, det.p_neg):
            assert all(-TINY <= x <= 1 + TINY for x in table.values())
        for x in set(det.ap_plus) & set(det.ap_neg):
            assert det.ap_plus[x] + det.ap_neg[x] <= 1 + 1e-9


def test_chain_selection():
    g = chain_graph()
    sel = CldagSelector(g, [0], 0.01)
    assert sel.decinf[[1, 2, 3, 4]] == pytest.approx([1, 1, 1, 1])
    assert cldag_select(g, [0], 1).seeds == [1]
    assert cldag_select(g, [0], 0).seeds == []


def test_incremental_decinf_matches_recomputation():
    g = random_influence_graph(60, 11, edge_prob=0.06)
    sel = CldagSelector(g, [0, 1, 2], 0.01)
    for _ in range(8):
        sel.step()
        np.testing.assert_allclose(sel.decinf, sel.decinf_from_scratch(), atol=1e-9)
    assert not set(sel.seeds) & {0, 1, 2}


def test_rebuild_mode_matches_stored():
    g = random_influence_graph(80, 12, edge_prob=0.05)
    a = cldag_select(g, [0, 1], 10, store_ldags=True)
    b = cldag_select(g, [0, 1], 10, store_ldags=False)
    assert a.seeds == b.seeds
    np.testing.assert_allclose(a.gains, b.gains, atol=1e-9)


def test_truncates_when_candidates_run_out():
    g = chain_graph()
    assert sorted(cldag_select(g, [0], 10).seeds) == [1, 2, 3, 4]


@pytest.mark.parametrize("keep,aggregate", [("all", "sum"), ("best", "max")])
def test_degenerate_ldags_reproduce_proximity(keep, aggregate):
    for seed in range(10):
        g = random_influence_graph(30, 100 + seed, edge_prob=0.15)
        N0 = [0, 1, 2]
        n_cand = len({int(v) for u, v in zip(g.src, g.dst) if u in N0 and v not in N0})
        k = min(5, n_cand)
        tables = degenerate_ldag_tables(g, N0, keep)
        assert cldag_select(g, N0, k, tables=tables).seeds == proximity_heuristic(g, N0, k, aggregate)


def test_ldag_keeps_every_arc_on_dags():
    # on a DAG with all ancestors absorbed, each LDAG keeps every graph arc
    g = random_influence_graph(11, 4, edge_prob=0.5, max_in=3, dag=True)
    for v in range(g.n):
        ld = find_ldag(g, v, 1e-12, "-")
        kept = {(u, x) for u, x, _ in ld.arcs}
        inside = {(int(u), int(x)) for u, x, w in zip(g.src, g.dst, g.w_neg)
                  if w > 0 and u in ld.members and x in ld.members}
        assert kept == inside


def test_dp_assumes_independent_arrivals():
    # Shared ancestry couples the positive and negative arrival times at v;
    # the DP treats them as independent, so it is close but not exact here.
    g = random_influence_graph(8, 60, edge_prob=0.45, max_in=3, dag=True, sign_prob=0.7)
    N0, S, v = [1, 7], [0, 2], 6
    exact = exact_negative_probs(g, S, N0)[v]
    dp = inf_cldag(v, find_ldag(g, v, 1e-12, "+"), find_ldag(g, v, 1e-12, "-"), S, N0)
    assert 1e-4 < abs(dp - exact) < 1e-2
