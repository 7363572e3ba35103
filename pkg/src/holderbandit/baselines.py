"""Fixed discretisation with uniform random sampling inside UCB1-selected bins.

This is the classic comparator for Hölder-continuous rewards: the bin count
follows the alpha = 1 formula, and the bin index is
``mean_k + sqrt(2 ln t / count_k)``.
"""

from __future__ import annotations

import math

import numpy as np

from .meta import BinGrid, num_bins
from .testbed import Oracle
from .trace import ConfigError, RegretTrace, build_trace


class Ucb1Bins:
    def __init__(self, T: int, d: int, rng: np.random.Generator):
        if T < 3:
            raise ConfigError("ucb1_bins needs T >= 3")
        self.grid = BinGrid(d, num_bins(T, d, 1.0)[1])
        if T < self.grid.n_eff:
            raise ConfigError(f"horizon T={T} is smaller than the number of bins {self.grid.n_eff}")
        self.rng = rng
        self.centers = self.grid.centers
        n = self.grid.n_eff
        self.counts = np.zeros(n, dtype=int)
        self.means = np.zeros(n)
        self.t = 0

    @property
    def initialized(self) -> bool:
        return self.t >= self.grid.n_eff

    def index(self) -> np.ndarray:
        return self.means + np.sqrt(2.0 * math.log(max(self.t, 1)) / self.counts)

    def select_bin(self) -> int:
        return int(np.argmax(self.index()))

    def play(self, oracle) -> tuple[np.ndarray, float, int]:
        k = self.t if not self.initialized else self.select_bin()
        offset = self.rng.uniform(-0.5, 0.5, size=self.grid.d)
        x = np.clip(self.centers[k] + self.grid.side * offset, 0.0, 1.0)
        y = oracle(x)
        self.counts[k] += 1
        self.means[k] += (y - self.means[k]) / self.counts[k]
        self.t += 1
        return x, y, k

    # spec-style aliases
    def init(self, oracle) -> None:
        while not self.initialized:
            self.play(oracle)

    def step(self, oracle) -> tuple[np.ndarray, float, int]:
        if not self.initialized:
            raise RuntimeError("call init() before step()")
        return self.play(oracle)


def run(T: int, d: int, oracle: Oracle, f_star: float, rng: np.random.Generator) -> RegretTrace:
    algo = Ucb1Bins(T, d, rng)
    start = len(oracle.values)
    bins, xs, ys = np.empty(T, dtype=int), [], np.empty(T)
    for t in range(T):
        x, y, k = algo.play(oracle)
        bins[t], ys[t] = k, y
        xs.append(x)
    meta = {"algorithm": "ucb1_bins", "n_bins": algo.grid.n_eff}
    return build_trace(oracle.values[start:], f_star, bins, np.array(xs), ys, meta=meta)
