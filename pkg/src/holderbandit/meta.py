"""UCB-Meta: a UCB layer over per-bin misspecified LinUCB instances.

The cube is tiled by ``m^d`` equal bins.  Each bin owns a
:class:`~holderbandit.linucb.MisspecLinUCB` on bin-local polynomial features;
the meta layer always advances the bin whose cached index is largest.
:class:`DoublingUCBMeta` restarts the algorithm on periods of length 2^i so
that no horizon is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .features import FeatureMap, build_feature_map
from .linucb import LinUcbConfig, MisspecLinUCB, beta_const_for
from .testbed import Oracle
from .trace import ConfigError, RegretTrace, build_trace

_MAX_CANDIDATES = 200


def _round_half_up(v: float) -> int:
    return int(math.floor(v + 0.5))


def num_bins(T: int, d: int, alpha: float) -> tuple[int, int]:
    """Bin count n = round(T^{d/(d+2a)} / ln(T)^{2d/(d+2a)}) and per-side count m."""
    if T < 3:
        raise ValueError("num_bins needs T >= 3")
    expo = d / (d + 2 * alpha)
    n = max(1, _round_half_up(T**expo / math.log(T) ** (2 * expo)))
    m = max(1, _round_half_up(n ** (1.0 / d)))
    return n, m


def bin_epsilon(L: float, side: float, alpha: float) -> float:
    if not (0 < side <= 1):
        raise ValueError("side must lie in (0, 1]")
    return L * side**alpha


@dataclass(frozen=True)
class BinGrid:
    d: int
    per_side: int

    @property
    def n_eff(self) -> int:
        return self.per_side**self.d

    @property
    def side(self) -> float:
        return 1.0 / self.per_side

    @property
    def centers(self) -> np.ndarray:
        """Bin centres in row-major order (last coordinate varies fastest)."""
        axis = (np.arange(self.per_side) + 0.5) / self.per_side
        return np.stack(np.meshgrid(*[axis] * self.d, indexing="ij"), axis=-1).reshape(-1, self.d)

    def bin_of(self, x) -> int:
        cell = np.minimum((np.asarray(x, dtype=float) * self.per_side).astype(int), self.per_side - 1)
        return int(np.ravel_multi_index(tuple(cell), (self.per_side,) * self.d))


def local_candidates(d: int, points_per_side: Optional[int] = None) -> np.ndarray:
    """Bin-local candidate grid in [-1/2, 1/2]^d, ordered by distance to the centre.

    Defaults: 11 points per coordinate for d <= 2, 5 for d >= 3, at most 200
    points (evenly sub-sampled).  Centre-first ordering makes index ties
    resolve toward the bin centre.
    """
    if points_per_side is None:
        points_per_side = 11 if d <= 2 else 5
    axis = np.linspace(-0.5, 0.5, points_per_side)
    U = np.stack(np.meshgrid(*[axis] * d, indexing="ij"), axis=-1).reshape(-1, d)
    if len(U) > _MAX_CANDIDATES:
        U = U[np.unique(np.linspace(0, len(U) - 1, _MAX_CANDIDATES).round().astype(int))]
    order = np.argsort(np.round(np.sum(U**2, axis=1), 12), kind="stable")
    return U[order]


@dataclass
class MetaConfig:
    alpha: float
    L: float
    d: int
    T: int
    delta: float = 0.1
    sigma: float = 0.1
    profile: object = "paper"
    points_per_side: Optional[int] = None

    def __post_init__(self):
        if self.alpha <= 0:
            raise ConfigError("alpha must be positive")
        if self.T < 1:
            raise ConfigError("T must be >= 1")


class UCBMeta:
    """Known-horizon UCB-Meta.  ``play`` performs exactly one oracle query.

    The first ``n_eff`` plays initialise the bins in canonical order (each base
    executes its random first action); afterwards every play advances the bin
    with the largest cached index.
    """

    def __init__(self, cfg: MetaConfig, rng: np.random.Generator, per_side: Optional[int] = None):
        self.cfg = cfg
        self.rng = rng
        if per_side is None:
            per_side = num_bins(cfg.T, cfg.d, cfg.alpha)[1] if cfg.T >= 3 else 1
        self.grid = BinGrid(cfg.d, per_side)
        n = self.grid.n_eff
        if cfg.T < n:
            raise ConfigError(f"horizon T={cfg.T} is smaller than the number of bins {n}")
        self.fmap: FeatureMap = build_feature_map(cfg.d, cfg.alpha)
        self.local = local_candidates(cfg.d, cfg.points_per_side)
        self.epsilon = bin_epsilon(cfg.L, self.grid.side, cfg.alpha)
        self.base_cfg = LinUcbConfig(
            dim=self.fmap.dim,
            epsilon=self.epsilon,
            delta=cfg.delta / n,
            sigma=cfg.sigma,
            kappa_sq=self.fmap.kappa_sq,
            candidates=self.fmap.local(self.local),
            beta_const=beta_const_for(cfg.profile),
        )
        self.centers = self.grid.centers
        self.bases = [MisspecLinUCB(self.base_cfg) for _ in range(n)]
        self.ucb_cache = np.full(n, -np.inf)
        self.counts = np.zeros(n, dtype=int)
        self._n_init = 0

    @property
    def initialized(self) -> bool:
        return self._n_init == self.grid.n_eff

    @property
    def steps(self) -> int:
        return int(self.counts.sum())

    def action(self, k: int, idx: int) -> np.ndarray:
        return self.centers[k] + self.grid.side * self.local[idx]

    def _advance(self, k: int, oracle) -> tuple[np.ndarray, float, int]:
        base = self.bases[k]
        if base.pending is None:
            base.pending = int(self.rng.integers(len(self.local)))
        idx = base.pending
        x = self.action(k, idx)
        y = oracle(x)
        base.update(self.base_cfg.candidates[idx], y, idx)
        base.pending, self.ucb_cache[k] = base.select()
        self.counts[k] += 1
        return x, y, k

    def init(self, oracle) -> None:
        while not self.initialized:
            self.play(oracle)

    def select_bin(self) -> int:
        return int(np.argmax(self.ucb_cache))

    def step(self, oracle) -> tuple[np.ndarray, float, int]:
        if not self.initialized:
            raise RuntimeError("call init() before step()")
        return self._advance(self.select_bin(), oracle)

    def play(self, oracle) -> tuple[np.ndarray, float, int]:
        """One query: an initialisation pull while bins remain fresh, else a meta step."""
        if not self.initialized:
            k = self._n_init
            self._n_init += 1
            return self._advance(k, oracle)
        return self._advance(self.select_bin(), oracle)


def doubling_schedule(total_T: int) -> list[int]:
    """Lengths of the doubling periods (1, 2, 4, ...) needed to cover ``total_T`` steps."""
    lengths, covered = [], 0
    while covered < total_T:
        lengths.append(2 ** len(lengths))
        covered += lengths[-1]
    return lengths


class DoublingUCBMeta:
    """Anytime UCB-Meta: period i (0-based) runs a fresh instance for 2^i steps.

    The fail probability of period i is 6 delta / (pi^2 (i+1)^2).
    """

    def __init__(self, alpha: float, L: float, d: int, delta: float, sigma: float,
                 rng: np.random.Generator, profile="paper", points_per_side: Optional[int] = None):
        self.alpha, self.L, self.d = alpha, L, d
        self.delta, self.sigma, self.profile = delta, sigma, profile
        self.points_per_side = points_per_side
        self.rng = rng
        self.period = -1
        self.remaining = 0
        self.current: Optional[UCBMeta] = None

    def _restart(self) -> None:
        self.period += 1
        T_i = 2**self.period
        delta_i = 6 * self.delta / (math.pi**2 * (self.period + 1) ** 2)
        cfg = MetaConfig(self.alpha, self.L, self.d, T_i, delta_i, self.sigma, self.profile, self.points_per_side)
        self.current = UCBMeta(cfg, self.rng)
        self.remaining = T_i

    def play(self, oracle) -> tuple[np.ndarray, float, int]:
        if self.remaining == 0:
            self._restart()
        self.remaining -= 1
        return self.current.play(oracle)


def _collect(algo, oracle: Oracle, T: int, f_star: float, meta: dict) -> RegretTrace:
    start = len(oracle.values)
    bins, xs, ys = np.empty(T, dtype=int), [], np.empty(T)
    for t in range(T):
        x, y, k = algo.play(oracle)
        bins[t], ys[t] = k, y
        xs.append(x)
    return build_trace(oracle.values[start:], f_star, bins, np.array(xs), ys, meta=meta)


def run(cfg: MetaConfig, oracle: Oracle, f_star: float, rng: np.random.Generator) -> RegretTrace:
    """Known-horizon run: exactly ``cfg.T`` oracle calls, initialisation included."""
    algo = UCBMeta(cfg, rng)
    meta = {"algorithm": "ucb_meta", "n_bins": algo.grid.n_eff, "epsilon": algo.epsilon}
    return _collect(algo, oracle, cfg.T, f_star, meta)


def doubling_run(cfg: MetaConfig, oracle: Oracle, f_star: float, total_T: int,
                 rng: np.random.Generator) -> RegretTrace:
    """Anytime run; ``cfg.T`` is ignored, periods are truncated at ``total_T``."""
    algo = DoublingUCBMeta(cfg.alpha, cfg.L, cfg.d, cfg.delta, cfg.sigma, rng, cfg.profile, cfg.points_per_side)
    return _collect(algo, oracle, total_T, f_star, {"algorithm": "ucb_meta", "doubling": True})
