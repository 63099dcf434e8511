import math

import numpy as np
import pytest

from cltblock.graph import InfluenceGraph
from cltblock.sim import (EnumerationTooLarge, LivePathGraph, SeedOverlapError, activation_from_live_path,
                          enumerate_live_paths, estimate_negative_spread, estimate_nir, estimate_nir_threshold,
                          exact_negative_spread, exact_nir, ibs, nir_samples, sample_ensemble, sample_live_path,
                          simulate_clt, simulate_clt_batch)
from cltblock.genlab import random_influence_graph

from conftest import chain_graph

RUNS = 10000


def band(p, runs=RUNS):
    return 3 * math.sqrt(p * (1 - p) / runs) + 1e-12


# threshold process


def test_single_negative_arc_always_fires():
    g = InfluenceGraph.from_edges(2, [(0, 1, 0.0, 1.0)])
    states, _ = simulate_clt_batch(g, [], [0], runs=500, rng=3)
    assert (states[:, 1] == -1).all()


def tie_graph():
    # a -> v positive, b -> v negative, both weight 1
    return InfluenceGraph.from_edges(3, [(0, 2, 1.0, 0.0), (1, 2, 0.0, 1.0)])


def test_negative_dominance_breaks_ties():
    states, _ = simulate_clt_batch(tie_graph(), [0], [1], runs=500, rng=4)
    assert (states[:, 2] == -1).all()
    out = simulate_clt(tie_graph(), [0], [1], rng=1)
    assert out.neg_active == {1, 2} and out.plus_active == {0}


def test_random_tie_is_a_fair_coin():
    states, _ = simulate_clt_batch(tie_graph(), [0], [1], runs=RUNS, rng=5, tie="random")
    frac = (states[:, 2] == -1).mean()
    assert abs(frac - 0.5) <= band(0.5)


def test_overlapping_seeds_rejected():
    with pytest.raises(SeedOverlapError):
        simulate_clt(tie_graph(), [0], [0, 1])


def test_active_sets_are_disjoint_and_contain_seeds():
    g = random_influence_graph(12, 8)
    for r in range(20):
        out = simulate_clt(g, [0, 3], [5], rng=r)
        assert not (out.plus_active & out.neg_active)
        assert {0, 3} <= out.plus_active and 5 in out.neg_active


# live-path sampling


def test_live_path_choice_frequencies():
    g = InfluenceGraph.from_edges(3, [(0, 2, 0.25, 0.0), (1, 2, 0.75, 0.0)])
    ens = sample_ensemble(g, RUNS, 11)
    pos, neg = ens.pos, ens.neg
    freq = np.bincount(pos[:, 2] + 1, minlength=3) / RUNS
    assert abs(freq[1] - 0.25) <= band(0.25) and abs(freq[2] - 0.75) <= band(0.75)
    assert freq[0] == 0
    assert (pos[:, 0] == -1).all() and (neg == -1).all()


def test_live_path_absent_with_residual_mass():
    g = InfluenceGraph.from_edges(2, [(0, 1, 0.4, 0.0)])
    pos = sample_ensemble(g, RUNS, 12).pos
    assert abs((pos[:, 1] == -1).mean() - 0.6) <= band(0.6)


def test_single_live_path_is_reproducible():
    g = random_influence_graph(10, 2)
    a, b = sample_live_path(g, 7), sample_live_path(g, 7)
    assert np.array_equal(a.pos_choice, b.pos_choice) and np.array_equal(a.neg_choice, b.neg_choice)


def test_activation_distance_rule():
    lp = LivePathGraph.from_choices(4, neg={1: 0, 2: 1})
    out = activation_from_live_path(lp, [], [0])
    assert out.neg_active == {0, 1, 2} and 3 not in out.plus_active | out.neg_active
    # equal distances: negative wins
    lp = LivePathGraph.from_choices(3, pos={2: 0}, neg={2: 1})
    assert 2 in activation_from_live_path(lp, [0], [1]).neg_active


def chain_live_path():
    return LivePathGraph.from_choices(5, pos={2: 4}, neg={1: 0, 2: 1, 3: 2})


def test_ibs_examples():
    lp = chain_live_path()
    assert ibs(lp, [], [0]) == frozenset()
    assert ibs(lp, [4], [0]) == {2, 3}
    without_w = LivePathGraph.from_choices(5, pos={2: 4}, neg={1: 0, 2: 1})
    assert ibs(without_w, [4], [0]) == {2}


def test_ibs_full_block_equals_baseline_minus_seeds():
    g = random_influence_graph(10, 21)
    for r in range(10):
        lp = sample_live_path(g, r)
        base = activation_from_live_path(lp, [], [0]).neg_active
        S = sorted(set(range(1, 10)))
        assert ibs(lp, S, [0]) == base - {0}


# estimators and the exact oracle


def test_empty_seed_sets_give_zero():
    g = chain_graph()
    assert estimate_nir(g, [], [0], runs=50).mean == 0.0
    assert exact_nir(g, [], [0]) == 0.0
    assert estimate_negative_spread(g, [4], [], runs=50).mean == 0.0


def test_chain_is_deterministic():
    g = chain_graph()
    est = estimate_nir(g, [4], [0], runs=2000, rng=1)
    assert est.mean == 2.0 and est.std_error == 0.0
    assert exact_nir(g, [4], [0]) == 2.0


def test_lone_negative_seed_counts_itself():
    g = InfluenceGraph.from_edges(3, [(1, 2, 0.5, 0.5)])
    assert estimate_negative_spread(g, [], [0], runs=100).mean == 1.0
    assert exact_negative_spread(g, [], [0]) == 1.0


def test_equal_distance_single_arc_value():
    # b -> v (w_neg=0.3), x -> v (w_plus=1): both reach v at distance 1, so the negative arc wins
    g = InfluenceGraph.from_edges(3, [(0, 2, 0.0, 0.3), (1, 2, 1.0, 0.0)])
    assert exact_nir(g, [1], [0]) == 0.0


def test_monte_carlo_matches_exact():
    g = random_influence_graph(8, 31, sign_prob=0.5)
    exact = exact_nir(g, [1, 6], [0])
    est = estimate_nir(g, [1, 6], [0], runs=RUNS, rng=2)
    assert abs(est.mean - exact) <= 3 * est.std_error + 1e-12
    thr = estimate_nir_threshold(g, [1, 6], [0], runs=RUNS, rng=2)
    assert abs(thr.mean - exact) <= 3 * thr.std_error + 1e-12


def test_spread_difference_identity():
    g = random_influence_graph(9, 17, sign_prob=0.5)
    S, N0 = [2, 5], [0]
    d = (estimate_negative_spread(g, [], N0, RUNS, 3).mean - estimate_negative_spread(g, S, N0, RUNS, 3).mean)
    est = estimate_nir(g, S, N0, RUNS, 3)
    assert abs(d - est.mean) <= 1e-9  # same live-path samples, so the identity is exact per run
    assert abs(exact_negative_spread(g, [], N0) - exact_negative_spread(g, S, N0) - exact_nir(g, S, N0)) < 1e-9


def test_samples_never_negative():
    g = random_influence_graph(10, 5)
    assert nir_samples(g, [1], [0, 2], 1000, 0).min() >= 0


def test_enumeration_guard():
    g = random_influence_graph(30, 1, edge_prob=0.6, max_in=5)
    with pytest.raises(EnumerationTooLarge):
        enumerate_live_paths(g, [0], limit=1000)


def test_enumeration_probabilities_sum_to_one():
    g = random_influence_graph(7, 9, sign_prob=0.5)
    ens = enumerate_live_paths(g, [0, 1])
    assert abs(ens.weights.sum() - 1.0) < 1e-12


def test_estimates_are_reproducible():
    g = random_influence_graph(10, 4)
    a = estimate_nir(g, [3], [0], 777, 9)
    b = estimate_nir(g, [3], [0], 777, 9)
    assert a == b and a.runs == 777
    with pytest.raises(ValueError):
        estimate_nir(g, [3], [0], 0)
