"""Time the hot kernels under the numba and numpy backends.

Each backend runs in its own interpreter because the backend is fixed at
import time.  Numba timings exclude compilation (one warm-up call first).

    python3 benchmarks/bench_backends.py [--nodes 1000] [--runs 2000] [--repeat 3]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
from cltblock import BACKEND
from cltblock.cldag import cldag_select
from cltblock.genlab import max_degree_seeds, power_law_graph
from cltblock.sim import estimate_nir, estimate_nir_threshold

nodes, runs, repeat = map(int, sys.argv[1:4])
g = power_law_graph(nodes, 2.16, rng=1)
N0 = max_degree_seeds(g, 20)
S = [v for v in range(g.n) if v not in N0][:20]
cases = {
    "live-path estimate": lambda: estimate_nir(g, S, N0, runs, 1),
    "threshold estimate": lambda: estimate_nir_threshold(g, S, N0, runs, 1),
    "cldag select k=10": lambda: cldag_select(g, N0, 10),
}
out = {"backend": BACKEND}
for name, fn in cases.items():
    fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    out[name] = best
print(json.dumps(out))
"""


def run(backend: str, args) -> dict:
    env = dict(os.environ, CLTBLOCK_BACKEND=backend)
    proc = subprocess.run([sys.executable, "-c", WORKER, str(args.nodes), str(args.runs), str(args.repeat)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=1000)
    ap.add_argument("--runs", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    fast, slow = run("numba", args), run("numpy", args)
    print(f"{'kernel':<22}{'numba s':>10}{'numpy s':>10}{'speedup':>10}")
    for name in fast:
        if name == "backend":
            continue
        print(f"{name:<22}{fast[name]:>10.4f}{slow[name]:>10.4f}{slow[name] / fast[name]:>9.1f}x")


if __name__ == "__main__":
    main()
