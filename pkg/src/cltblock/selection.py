"""Ordered seed selections and their per-round log."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

LOG_HEADER = ("round", "node", "gain", "evals_so_far", "elapsed_ms", "runs")


@dataclass
class Selection:
    """Seeds in pick order plus what each round cost.

    ``runs`` is the Monte-Carlo batch size behind each gain, or ``None`` when
    the gains are exact or heuristic scores.
    """

    algo: str
    seeds: list[int] = field(default_factory=list)
    gains: list[float] = field(default_factory=list)
    evals: list[int] = field(default_factory=list)
    elapsed_ms: list[float] = field(default_factory=list)
    runs: int | None = None

    def record(self, node: int, gain: float, evals: int, elapsed_ms: float) -> None:
        self.seeds.append(int(node))
        self.gains.append(float(gain))
        self.evals.append(int(evals))
        self.elapsed_ms.append(float(elapsed_ms))

    def __len__(self) -> int:
        return len(self.seeds)

    @property
    def total_evals(self) -> int:
        return self.evals[-1] if self.evals else 0

    def log_rows(self, labels=None):
        for r, (v, gain, ev, ms) in enumerate(zip(self.seeds, self.gains, self.evals, self.elapsed_ms), 1):
            node = labels(v) if labels else v
            yield (r, node, f"{gain:.10g}", ev, f"{ms:.3f}", "" if self.runs is None else self.runs)

    def write_log(self, path, labels=None) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(LOG_HEADER)
            w.writerows(self.log_rows(labels))


def candidates_mask(n: int, N0, exclude=()) -> np.ndarray:
    mask = np.ones(n, bool)
    mask[np.asarray(list(N0), dtype=np.int64)] = False
    mask[np.asarray(list(exclude), dtype=np.int64)] = False
    return mask
