"""``cltblock`` command line: select, evaluate, sweep, scale-bench, gadget, gen."""

from __future__ import annotations

import argparse
import csv
import io
import multiprocessing as mp
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import degree_heuristic, proximity_heuristic, random_heuristic
from .cldag import DEFAULT_THETA, CldagSelector, cldag_select
from .genlab import (BaseGraph, build_np_gadget, check_gadget_vc, gen_power_law, max_degree_seeds,
                     power_law_graph)
from .graph import (GraphParseError, GraphValidationError, InfluenceGraph, RateConfig, TieRule,
                    load_edge_list, load_influence_graph, load_signed_edge_list, node_dictionary_path,
                    read_seed_file, write_edge_list, write_node_dictionary, write_seed_file,
                    write_signed_edge_list)
from .greedy import celf_greedy, naive_greedy
from .rng import stream
from .selection import Selection
from .sim import SeedOverlapError, check_seeds, estimate_negative_spread, estimate_nir

OUTPUT_ENV = "CLTBLOCK_OUTPUT_DIR"
ALGOS = ("greedy", "celf", "cldag", "degree", "random", "proximity")
ESTIMATE_HEADER = ("algo", "k", "mean", "std_error", "runs", "seed")
EVALUATE_HEADER = ("algo", "k", "nir_mean", "nir_std_error", "neg_mean", "neg_std_error", "runs", "seed")
BENCH_HEADER = ("size", "algo", "trial", "seconds", "censored")


class CliError(Exception):
    pass


@dataclass
class ExperimentConfig:
    graph_path: str | None = None
    undirected: bool = False
    signed: bool = False
    p_plus: float = 1.0
    p_neg: float = 1.0
    tie_rule: str = "negative_dominance"
    neg_seed_mode: str = "max_degree"
    neg_seed_count: int = 50
    neg_seed_file: str | None = None
    algo: str = "cldag"
    k: int = 50
    theta: float = DEFAULT_THETA
    select_runs: int = 10000
    eval_runs: int = 1000
    master_seed: int = 0
    output_path: str = "."
    store_ldags: bool = True

    def validate(self) -> None:
        if self.algo not in ALGOS:
            raise CliError(f"unknown algo {self.algo!r}; choose from {', '.join(ALGOS)}")
        if self.neg_seed_mode not in ("max_degree", "random", "file"):
            raise CliError(f"unknown negative seed mode {self.neg_seed_mode!r}")
        if self.neg_seed_mode != "file" and self.neg_seed_count < 1:
            raise CliError("neg-count must be at least 1")
        if self.neg_seed_mode == "file" and not self.neg_seed_file:
            raise CliError("--neg-file is required with --neg-mode file")
        if self.k < 0 or self.select_runs < 1 or self.eval_runs < 1:
            raise CliError("k must be >= 0 and run counts >= 1")
        if not 0.0 < self.theta <= 1.0:
            raise CliError("theta must lie in (0, 1]")
        TieRule(self.tie_rule)

    @property
    def rates(self) -> RateConfig:
        return RateConfig(self.p_plus, self.p_neg, TieRule(self.tie_rule))


def _config(ns: argparse.Namespace) -> ExperimentConfig:
    fields = ExperimentConfig.__dataclass_fields__
    cfg = ExperimentConfig(**{k: v for k, v in vars(ns).items() if k in fields and v is not None})
    cfg.validate()
    return cfg


def _load_graph(cfg: ExperimentConfig) -> InfluenceGraph:
    if not cfg.graph_path:
        raise CliError("--graph is required")
    if not Path(cfg.graph_path).is_file():
        raise CliError(f"graph file not found: {cfg.graph_path}")
    if cfg.signed:
        return load_signed_edge_list(cfg.graph_path)
    return load_influence_graph(cfg.graph_path, cfg.rates, directed=not cfg.undirected)


def negative_seeds(g: InfluenceGraph, cfg: ExperimentConfig) -> list[int]:
    if cfg.neg_seed_mode == "file":
        return read_seed_file(cfg.neg_seed_file, g)
    count = min(cfg.neg_seed_count, g.n)
    if cfg.neg_seed_mode == "max_degree":
        return max_degree_seeds(g, count)
    gen = stream(cfg.master_seed, "neg-seeds")
    return sorted(gen.choice(g.n, size=count, replace=False).tolist())


def run_selector(g: InfluenceGraph, N0: list[int], cfg: ExperimentConfig, k: int | None = None) -> Selection:
    k = cfg.k if k is None else k
    if cfg.algo == "greedy":
        return naive_greedy(g, N0, k, "mc", cfg.select_runs, stream(cfg.master_seed, "select").integers(2**63))
    if cfg.algo == "celf":
        return celf_greedy(g, N0, k, "mc", cfg.select_runs, stream(cfg.master_seed, "select").integers(2**63))
    if cfg.algo == "cldag":
        return cldag_select(g, N0, k, cfg.theta, cfg.store_ldags)
    t0 = time.perf_counter()
    if cfg.algo == "degree":
        seeds = degree_heuristic(g, N0, k)
    elif cfg.algo == "random":
        seeds = random_heuristic(g, N0, k, stream(cfg.master_seed, "random-baseline"))
    else:
        seeds = proximity_heuristic(g, N0, k)
    sel = Selection(cfg.algo)
    ms = 1e3 * (time.perf_counter() - t0)
    for v in seeds:
        sel.record(v, float("nan"), 0, ms)
    return sel


def _out(cfg: ExperimentConfig, name: str) -> Path:
    root = Path(cfg.output_path)
    root.mkdir(parents=True, exist_ok=True)
    return root / name


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_select(ns) -> int:
    cfg = _config(ns)
    g = _load_graph(cfg)
    N0 = negative_seeds(g, cfg)
    sel = run_selector(g, N0, cfg)
    prefix = ns.prefix or cfg.algo
    write_seed_file(_out(cfg, f"{prefix}.seeds"), g, sel.seeds)
    write_seed_file(_out(cfg, f"{prefix}.neg"), g, N0)
    sel.write_log(_out(cfg, f"{prefix}.log.csv"), g.label)
    if ns.ldag_stats:
        if cfg.algo != "cldag":
            raise CliError("--ldag-stats only applies to --algo cldag")
        CldagSelector(g, N0, cfg.theta).write_stats(ns.ldag_stats, g.label)
    print(f"{cfg.algo}: {len(sel)} seeds -> {_out(cfg, prefix + '.seeds')}")
    return 0


def evaluate_row(g, S, N0, runs: int, seed: int, algo: str = "custom"):
    try:
        check_seeds(g, S, N0)
    except SeedOverlapError as exc:
        raise CliError(str(exc)) from exc
    nir = estimate_nir(g, S, N0, runs, stream(seed, "evaluate").integers(2**63))
    neg = estimate_negative_spread(g, S, N0, runs, stream(seed, "evaluate").integers(2**63))
    return (algo, len(S), f"{nir.mean:.10g}", f"{nir.std_error:.10g}",
            f"{neg.mean:.10g}", f"{neg.std_error:.10g}", runs, seed)


def cmd_evaluate(ns) -> int:
    cfg = _config(ns)
    g = _load_graph(cfg)
    S = read_seed_file(ns.seeds, g)
    N0 = read_seed_file(ns.neg, g)
    row = evaluate_row(g, S, N0, cfg.eval_runs, cfg.master_seed, ns.label)
    _emit(_csv_text(EVALUATE_HEADER, [row]), ns.out)
    return 0


def sweep_rows(g, N0, cfg: ExperimentConfig, algos, k_grid):
    k_max = max(k_grid, default=0)
    rows = []
    eval_seed = int(stream(cfg.master_seed, "sweep-eval").integers(2**63))
    for algo in algos:
        cfg.algo = algo
        cfg.validate()
        order = run_selector(g, N0, cfg, k_max).seeds if k_grid else []
        for k in k_grid:
            est = estimate_nir(g, order[:k], N0, cfg.eval_runs, eval_seed)
            rows.append((algo, k, f"{est.mean:.10g}", f"{est.std_error:.10g}", est.runs, cfg.master_seed))
    return rows


def cmd_sweep(ns) -> int:
    cfg = _config(ns)
    g = _load_graph(cfg)
    N0 = negative_seeds(g, cfg)
    rows = sweep_rows(g, N0, cfg, _split(ns.algos), [int(x) for x in _split(ns.k_grid)])
    _emit(_csv_text(ESTIMATE_HEADER, rows), ns.out)
    return 0


def _bench_cell(size, trial, algo, cfg: ExperimentConfig, exponent: float):
    gseed = int(stream(cfg.master_seed, "scale-graph", size, trial).integers(2**63))
    g = power_law_graph(size, exponent, gseed, cfg.rates)
    N0 = max_degree_seeds(g, min(cfg.neg_seed_count, g.n))
    cfg.algo = algo
    t0 = time.perf_counter()
    run_selector(g, N0, cfg)
    return time.perf_counter() - t0


def _bench_child(queue, *args):
    queue.put(_bench_cell(*args))


def _warm_up(cfg: ExperimentConfig, algos) -> None:
    # compile kernels before any timing or forking
    for algo in algos:
        c = ExperimentConfig(**{**vars(cfg), "select_runs": 8, "k": 1, "algo": algo})
        _bench_cell(16, 0, algo, c, 2.16)


def bench_rows(sizes, trials: int, algos, cfg: ExperimentConfig, exponent: float, timeout: float | None):
    _warm_up(cfg, algos)
    rows = []
    for size in sizes:
        for algo in algos:
            times, censored_any = [], False
            for trial in range(trials):
                secs, censored = None, False
                if timeout:
                    ctx = mp.get_context("fork")
                    q = ctx.Queue()
                    proc = ctx.Process(target=_bench_child, args=(q, size, trial, algo, cfg, exponent))
                    proc.start()
                    proc.join(timeout)
                    if proc.is_alive():
                        proc.terminate()
                        proc.join()
                        censored = True
                    else:
                        secs = q.get()
                else:
                    secs = _bench_cell(size, trial, algo, cfg, exponent)
                censored_any |= censored
                if secs is not None:
                    times.append(secs)
                rows.append((size, algo, trial, "" if secs is None else f"{secs:.6f}", int(censored)))
            mean = f"{np.mean(times):.6f}" if times else ""
            rows.append((size, algo, "mean", mean, int(censored_any)))
    return rows


def cmd_scale_bench(ns) -> int:
    cfg = _config(ns)
    sizes = [int(x) for x in _split(ns.sizes)]
    if sizes != sorted(sizes):
        raise CliError("sizes must be ascending")
    timeout = None if ns.timeout <= 0 else ns.timeout
    rows = bench_rows(sizes, ns.trials, _split(ns.algos), cfg, ns.exponent, timeout)
    _emit(_csv_text(BENCH_HEADER, rows), ns.out)
    return 0


def gadget_report(base: BaseGraph, k: int) -> str:
    _, _, spec = build_np_gadget(base)
    vc, met = check_gadget_vc(base, k)
    yes = {True: "yes", False: "no"}
    return f"VC: {yes[vc]}, NIR≥{spec.threshold}: {yes[met]}"


def cmd_gadget(ns) -> int:
    dg = load_edge_list(ns.base, directed=False)
    base = BaseGraph.from_digraph(dg)
    print(gadget_report(base, ns.k))
    if ns.export:
        g, N0, spec = build_np_gadget(base)
        write_signed_edge_list(ns.export, g)
        with open(f"{ns.export}.roles", "w") as fh:
            for v in N0:
                fh.write(f"negative {g.label(v)}\n")
            for v in spec.bottoms:
                fh.write(f"bottom {g.label(v)}\n")
    return 0


def cmd_gen(ns) -> int:
    seed = int(stream(ns.master_seed, "gen").integers(2**63))
    dg = gen_power_law(ns.n, ns.exponent, seed)
    raw = type(dg)(dg.n, dg.src, dg.dst, np.ones_like(dg.weight), dg.labels)
    write_edge_list(ns.out, raw)
    write_node_dictionary(node_dictionary_path(ns.out), raw.labels, raw.n)
    print(f"{ns.n} nodes, {raw.m} arcs -> {ns.out}")
    return 0


# ---------------------------------------------------------------------------
# parser


def _split(text: str | None) -> list[str]:
    return [t for t in (text or "").replace(",", " ").split() if t]


def _common(p: argparse.ArgumentParser, selection: bool = True) -> None:
    p.add_argument("--graph", dest="graph_path", help="edge list: source target [count]")
    p.add_argument("--undirected", action="store_true", help="emit both directions for every line")
    p.add_argument("--signed", action="store_true",
                   help="graph lines are 'source target w_plus w_neg' final weights (no normalisation)")
    p.add_argument("--p-plus", type=float, dest="p_plus")
    p.add_argument("--p-neg", type=float, dest="p_neg")
    p.add_argument("--tie-rule", dest="tie_rule", choices=[t.value for t in TieRule])
    p.add_argument("--seed", type=int, dest="master_seed", help="master seed (default 0)")
    p.add_argument("--eval-runs", type=int, dest="eval_runs")
    if selection:
        p.add_argument("--neg-mode", dest="neg_seed_mode", choices=["max_degree", "random", "file"])
        p.add_argument("--neg-count", type=int, dest="neg_seed_count")
        p.add_argument("--neg-file", dest="neg_seed_file")
        p.add_argument("-k", type=int, dest="k")
        p.add_argument("--theta", type=float)
        p.add_argument("--select-runs", type=int, dest="select_runs")
        p.add_argument("--no-store-ldags", dest="store_ldags", action="store_false", default=None,
                       help="keep only OutLS+ and rebuild LDAGs on demand")


def build_parser() -> argparse.ArgumentParser:
    default_out = os.environ.get(OUTPUT_ENV, ".")
    ap = argparse.ArgumentParser(prog="cltblock", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="choose positive seeds")
    _common(p)
    p.add_argument("--algo", choices=ALGOS)
    p.add_argument("--out-dir", dest="output_path", default=default_out)
    p.add_argument("--prefix", help="output file prefix (default: algo name)")
    p.add_argument("--ldag-stats", help="write node,size_plus,size_neg,outls_size CSV")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("evaluate", help="estimate sigma_NIR and sigma_N for a seed file")
    _common(p, selection=False)
    p.add_argument("--seeds", required=True)
    p.add_argument("--neg", required=True)
    p.add_argument("--label", default="custom")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="blocking curve over a k grid")
    _common(p)
    p.add_argument("--algos", default="cldag,proximity,degree,random")
    p.add_argument("--k-grid", default="")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("scale-bench", help="selection time on generated power-law graphs")
    _common(p)
    p.add_argument("--sizes", default="200,400,800,1600,3200,6400")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--algos", default="cldag")
    p.add_argument("--exponent", type=float, default=2.16)
    p.add_argument("--timeout", type=float, default=7200.0, help="seconds per cell; <= 0 disables")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scale_bench)

    p = sub.add_parser("gadget", help="vertex-cover reduction check")
    p.add_argument("--base", required=True, help="undirected edge list of the base graph")
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--export", help="write the gadget graph here (plus a .roles sidecar)")
    p.set_defaults(func=cmd_gadget)

    p = sub.add_parser("gen", help="write a power-law graph as an edge list")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--exponent", type=float, default=2.16)
    p.add_argument("--seed", type=int, dest="master_seed", default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)
    return ap


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except (CliError, GraphParseError, GraphValidationError, SeedOverlapError, ValueError, OSError) as exc:
        print(f"cltblock {ns.command}: error: {exc}", file=sys.stderr)
        return 2
