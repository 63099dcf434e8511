"""Property checks on fixed live-path samples."""

from hypothesis import given, settings, strategies as st

from cltblock.genlab import random_influence_graph
from cltblock.graph import InfluenceGraph
from cltblock.sim import activation_from_live_path, exact_nir, ibs, sample_live_path


@st.composite
def instances(draw):
    n = draw(st.integers(4, 12))
    g = random_influence_graph(n, draw(st.integers(0, 10**6)), edge_prob=draw(st.floats(0.15, 0.6)))
    lp = sample_live_path(g, draw(st.integers(0, 10**6)))
    nodes = draw(st.permutations(range(n)))
    n_neg = draw(st.integers(1, 2))
    N0 = nodes[:n_neg]
    rest = nodes[n_neg:]
    t = draw(st.integers(0, len(rest) - 1))
    s = draw(st.integers(0, t))
    T = rest[:t]
    S = T[:s]
    x = rest[t]
    return lp, N0, S, T, x


@settings(max_examples=300, deadline=None)
@given(instances())
def test_ibs_monotone_and_diminishing(case):
    lp, N0, S, T, x = case
    f = lambda A: len(ibs(lp, A, N0))
    assert f(S) <= f(T)
    assert f(S + [x]) - f(S) >= f(T + [x]) - f(T)


@settings(max_examples=150, deadline=None)
@given(instances())
def test_outcome_partitions_nodes(case):
    lp, N0, S, _, _ = case
    out = activation_from_live_path(lp, S, N0)
    assert not out.plus_active & out.neg_active
    assert set(S) <= out.plus_active and set(N0) <= out.neg_active
    assert ibs(lp, S, N0) <= activation_from_live_path(lp, [], N0).neg_active


def blocking_fixture():
    """Deterministic graph where a positive seed only helps once another seed is placed.

    b feeds a negative chain b->c1->c2->y; x feeds a positive chain
    x->a1->a2->y->w; a second negative chain of length five ends at w.
    """
    neg = [(0, 1), (1, 2), (2, 3), (0, 8), (8, 9), (9, 10), (10, 11), (11, 7)]
    pos = [(4, 5), (5, 6), (6, 3), (3, 7)]
    return InfluenceGraph.from_edges(12, [(u, v, 0.0, 1.0) for u, v in neg] + [(u, v, 1.0, 0.0) for u, v in pos])


def test_blocking_can_be_supermodular():
    # x reaches y at the same time as the negative chain and loses the tie;
    # once c1 is seeded the chain is cut, y turns positive and relays to w
    # one step ahead of the long negative chain.
    g = blocking_fixture()
    f = lambda S: exact_nir(g, S, [0])
    assert f([4]) - f([]) == 0.0
    assert f([1, 4]) - f([1]) == 1.0
