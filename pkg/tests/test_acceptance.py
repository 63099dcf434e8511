"""Acceptance criteria, one test each.

Every test records ``(passed, detail)`` in ``conftest.ACCEPTANCE_RESULTS``
before asserting, so the terminal summary lists a PASS/FAIL line per
criterion even when some of them fail.
"""

import itertools
import math
import time

import numpy as np
import pytest

from cltblock.baselines import degree_heuristic, proximity_heuristic, random_heuristic
from cltblock.cldag import cldag_select, degenerate_ldag_tables, find_ldag, inf_cldag
from cltblock.genlab import (BaseGraph, check_gadget_vc, max_degree_seeds, power_law_graph,
                             random_base_graph, random_influence_graph)
from cltblock.graph import RateConfig
from cltblock.greedy import celf_greedy, exhaustive_best, naive_greedy
from cltblock.sim import (estimate_nir, estimate_nir_threshold, exact_negative_probs, exact_nir, ibs,
                          sample_live_path)

from conftest import ACCEPTANCE_RESULTS, small_corpus

RUNS = 10000
EVAL_RUNS = 1000
EVAL_SEED = 20240601


@pytest.fixture(scope="module")
def corpus():
    return small_corpus(30, n_lo=4, n_hi=8, seed=1)


def record(n, ok, detail):
    ACCEPTANCE_RESULTS[n] = (bool(ok), detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def combined(*ses):
    return math.sqrt(sum(s * s for s in ses))


def test_criterion_01_live_path_equivalence(corpus):
    worst, bad = 0.0, 0
    for i, (g, S, N0) in enumerate(corpus):
        a = estimate_nir_threshold(g, S, N0, RUNS, rng=1000 + i)
        b = estimate_nir(g, S, N0, RUNS, rng=2000 + i)
        gap = abs(a.mean - b.mean)
        tol = 3 * combined(a.std_error, b.std_error)
        z = gap / tol * 3 if tol > 0 else (0.0 if gap < 1e-12 else math.inf)
        worst = max(worst, z)
        bad += z > 3
    record(1, bad == 0, f"{len(corpus)} graphs, {bad} outside 3 se, worst |z|={worst:.2f}")


def test_criterion_02_oracle_agreement(corpus):
    worst, bad = 0.0, 0
    for i, (g, S, N0) in enumerate(corpus):
        exact = exact_nir(g, S, N0)
        est = estimate_nir(g, S, N0, RUNS, rng=3000 + i)
        gap = abs(est.mean - exact)
        z = gap / est.std_error if est.std_error > 0 else (0.0 if gap < 1e-9 else math.inf)
        worst = max(worst, z)
        bad += z > 3
    record(2, bad == 0, f"{len(corpus)} graphs, {bad} outside 3 se of exact, worst |z|={worst:.2f}")


def test_criterion_03_monotone_submodular():
    gen = np.random.default_rng(7)
    cases = mono = sub = 0
    while cases < 1500:
        n = int(gen.integers(5, 16))
        g = random_influence_graph(n, int(gen.integers(2**31)), edge_prob=float(gen.uniform(0.15, 0.5)))
        for _ in range(5):
            lp = sample_live_path(g, int(gen.integers(2**31)))
            nodes = gen.permutation(n).tolist()
            n_neg = int(gen.integers(1, 3))
            N0, rest = nodes[:n_neg], nodes[n_neg:]
            t = int(gen.integers(0, len(rest)))
            T, x = rest[:t], rest[t]
            S = [v for v in T if gen.random() < 0.5]
            f = {key: len(ibs(lp, A, N0)) for key, A in (("S", S), ("T", T), ("Sx", S + [x]), ("Tx", T + [x]))}
            mono += f["S"] > f["T"]
            sub += f["Sx"] - f["S"] < f["Tx"] - f["T"]
            cases += 1
    record(3, mono == 0 and sub == 0, f"{cases} cases, {mono} monotonicity and {sub} submodularity violations")


def test_criterion_04_greedy_approximation(corpus):
    bound = 1 - 1 / math.e
    worst, bad, checked = math.inf, 0, 0
    for g, _, N0 in corpus:
        if g.n > 10:
            continue
        for k in (1, 2, 3):
            _, opt = exhaustive_best(g, N0, k)
            got = exact_nir(g, naive_greedy(g, N0, k, evaluator="exact").seeds, N0)
            checked += 1
            if opt > 0:
                worst = min(worst, got / opt)
                bad += got < bound * opt - 1e-12
    record(4, bad == 0, f"{checked} (graph, k) instances, {bad} below 1-1/e, worst ratio {worst:.4f}")


def test_criterion_05_celf_soundness(corpus):
    mismatches = 0
    for g, _, N0 in corpus:
        k = g.n - len(N0)
        a = naive_greedy(g, N0, k, evaluator="exact")
        b = celf_greedy(g, N0, k, evaluator="exact")
        mismatches += a.seeds != b.seeds
    savings = []
    for s in range(40):
        g = random_influence_graph(20, s, edge_prob=0.15, max_in=2, sign_prob=0.5)
        try:
            a = naive_greedy(g, [0, 1], 5, evaluator="exact")
        except ValueError:
            continue  # enumeration too large for this draw
        b = celf_greedy(g, [0, 1], 5, evaluator="exact")
        mismatches += a.seeds != b.seeds
        savings.append((b.total_evals, a.total_evals))
        if len(savings) == 5:
            break
    fewer = any(c < n for c, n in savings)
    detail = (f"{len(corpus)} corpus graphs + {len(savings)} 20-node graphs, {mismatches} sequence mismatches; "
              f"calls celf/naive on 20 nodes: {', '.join(f'{c}/{n}' for c, n in savings)}")
    record(5, mismatches == 0 and fewer and savings, detail)


def test_criterion_06_dp_exactness():
    instances, gen = [], np.random.default_rng(6)
    seed = 0
    while len(instances) < 20:
        seed += 1
        n = int(gen.integers(6, 13))
        g = random_influence_graph(n, 600 + seed, edge_prob=0.35, max_in=3, dag=True, sign_prob=0.6)
        perm = gen.permutation(n).tolist()
        N0, S = sorted(perm[:2]), sorted(perm[2:4])
        try:
            exact = exact_negative_probs(g, S, N0, limit=300_000)
        except ValueError:
            continue
        instances.append((g, S, N0, exact))
    worst, bad_nodes, bad_inst = 0.0, 0, 0
    for g, S, N0, exact in instances:
        inst_bad = False
        for v in range(g.n):
            if v in N0 or v in S:
                continue
            lp, ln = find_ldag(g, v, 1e-12, "+"), find_ldag(g, v, 1e-12, "-")
            err = abs(inf_cldag(v, lp, ln, S, N0) - exact[v])
            worst = max(worst, err)
            if err > 1e-9:
                bad_nodes += 1
                inst_bad = True
        bad_inst += inst_bad
    record(6, bad_nodes == 0,
           f"20 DAG instances, {bad_inst} with a node off by > 1e-9 ({bad_nodes} nodes), max error {worst:.3g}")


def sigma(g, S, N0):
    return estimate_nir(g, S, N0, EVAL_RUNS, EVAL_SEED)


def test_criterion_07_cldag_quality():
    ratios = []
    t0 = time.perf_counter()
    for s in range(10):
        g = power_law_graph(500, 2.16, rng=700 + s)
        N0 = max_degree_seeds(g, 20)
        c = sigma(g, cldag_select(g, N0, 30).seeds, N0).mean
        gr = sigma(g, celf_greedy(g, N0, 30, runs=RUNS, rng=s).seeds, N0).mean
        ratios.append(c / gr if gr > 0 else 1.0)
    worst = min(ratios)
    record(7, worst >= 0.85, f"CLDAG/greedy per graph: min {worst:.3f}, mean {np.mean(ratios):.3f} "
                             f"({time.perf_counter() - t0:.0f} s)")


def loglog_slope(sizes, times):
    return float(np.polyfit(np.log(sizes), np.log(times), 1)[0])


def test_criterion_08_scalability():
    sizes = [200, 400, 800, 1600, 3200, 6400]
    trials = 3
    cldag_select(power_law_graph(100, rng=1), [0], 2)  # compile outside timing
    means, graphs = [], {}
    for size in sizes:
        times = []
        for t in range(trials):
            g = power_law_graph(size, 2.16, rng=800 + 10 * size + t)
            N0 = max_degree_seeds(g, 50)
            graphs.setdefault(size, (g, N0))
            t0 = time.perf_counter()
            cldag_select(g, N0, 50)
            times.append(time.perf_counter() - t0)
        means.append(float(np.mean(times)))
    slope = loglog_slope(sizes, means)
    g, N0 = graphs[1600]
    t0 = time.perf_counter()
    celf_greedy(g, N0, 50, runs=1000, rng=0)
    greedy_time = time.perf_counter() - t0
    speedup = greedy_time / means[sizes.index(1600)]
    detail = (f"CLDAG slope {slope:.2f} (times {', '.join(f'{m:.3f}' for m in means)} s); "
              f"speedup at 1.6K {speedup:.0f}x (greedy {greedy_time:.1f} s)")
    record(8, abs(slope - 1.0) <= 0.35 and speedup >= 50, detail)


def test_criterion_09_proximity_equivalence():
    mismatches, checked = 0, 0
    for s in range(20):
        g = random_influence_graph(40, 900 + s, edge_prob=0.1)
        N0 = [0, 1, 2, 3]
        cands = {int(v) for u, v, w in zip(g.src, g.dst, g.w_neg) if u in N0 and v not in N0 and w > 0}
        k = min(8, len(cands))
        got = cldag_select(g, N0, k, tables=degenerate_ldag_tables(g, N0, "all")).seeds
        mismatches += got != proximity_heuristic(g, N0, k)
        checked += 1
    record(9, mismatches == 0, f"{checked} fixtures, {mismatches} sequence mismatches")


def gadget_corpus():
    fixed = [
        BaseGraph.from_edges(2, [(0, 1)]),
        BaseGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)]),
        BaseGraph.from_edges(3, [(0, 1), (1, 2)]),
        BaseGraph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]),
        BaseGraph.from_edges(5, [(0, i) for i in range(1, 5)]),
        BaseGraph.from_edges(4, list(itertools.combinations(range(4), 2))),
        BaseGraph.from_edges(6, [(0, 1), (2, 3), (4, 5)]),
    ]
    return fixed + [random_base_graph(int(n), 1000 + i, 0.4) for i, n in enumerate([5, 6, 6, 7, 7, 8, 8, 8])]


def test_criterion_10_gadget_reduction():
    bases = gadget_corpus()
    bad, checked = 0, 0
    for base in bases:
        for k in range(base.n + 1):
            vc, met = check_gadget_vc(base, k)
            bad += vc != met
            checked += 1
    record(10, len(bases) == 15 and bad == 0, f"{len(bases)} base graphs, {checked} (graph, k) pairs, {bad} disagreements")


def test_criterion_11_dominance_trends():
    lines, ok = [], True
    for p_plus in (1.0, 0.5):
        for s in range(3):
            g = power_law_graph(1000, 2.16, rng=1100 + s, cfg=RateConfig(p_plus, 1.0))
            N0 = max_degree_seeds(g, 50)
            est = {
                "cldag": sigma(g, cldag_select(g, N0, 50).seeds, N0),
                "prox": sigma(g, proximity_heuristic(g, N0, 50), N0),
                "degree": sigma(g, degree_heuristic(g, N0, 50), N0),
                "random": sigma(g, random_heuristic(g, N0, 50, rng=s), N0),
            }

            def band(a, b):
                return 3 * combined(est[a].std_error, est[b].std_error)

            c_p = est["cldag"].mean - est["prox"].mean
            first = c_p >= band("cldag", "prox") if p_plus == 0.5 else c_p >= -band("cldag", "prox")
            second = est["prox"].mean - est["degree"].mean >= -band("prox", "degree")
            third = abs(est["degree"].mean - est["random"].mean) <= band("degree", "random")
            ok &= first and second and third
            lines.append(f"p+={p_plus} g{s}: " + " ".join(f"{a}={e.mean:.1f}" for a, e in est.items())
                         + f" [{'ok' if first else 'X'}{'ok' if second else 'X'}{'ok' if third else 'X'}]")
    record(11, ok, "; ".join(lines))
