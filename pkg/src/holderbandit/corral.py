"""Corral master over smoothed base algorithms, and smoothness adaptation.

The master keeps a distribution ``p`` over M bases and updates it by
log-barrier online mirror descent on importance-weighted losses.  Every base
is wrapped in a :class:`SmoothedBase`, which advances its inner algorithm only
on "fresh" activations (probability 1/tau at the tau-th activation) and
otherwise replays one of the inner algorithm's past actions.

Two drivers are provided: :func:`corral_meta_run` corrals one LinUCB per bin,
and :func:`adapt_run` corrals doubling UCB-Meta instances over a grid of
smoothness inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import brentq

from .meta import DoublingUCBMeta, MetaConfig, UCBMeta
from .testbed import Oracle
from .trace import ConfigError, RegretTrace, build_trace

_LAMBDA_XTOL = 1e-12


@dataclass
class CorralState:
    M: int
    p: np.ndarray
    p_lower: np.ndarray
    rho: np.ndarray
    eta: np.ndarray
    gamma: float
    beta_mult: float
    t: int = 1
    clipped: int = 0


def corral_init(M: int, eta: float, T: int) -> CorralState:
    if M < 1:
        raise ValueError("need at least one base")
    if eta <= 0:
        raise ValueError("eta must be positive")
    if T < 3:
        raise ValueError("Corral needs T >= 3 (so that ln T > 1)")
    rho = np.full(M, 2.0 * M)
    return CorralState(
        M=M,
        p=np.full(M, 1.0 / M),
        p_lower=1.0 / rho,
        rho=rho,
        eta=np.full(M, float(eta)),
        gamma=1.0 / T,
        beta_mult=math.exp(1.0 / math.log(T)),
    )


def reward_to_loss(r: float, sigma: float) -> tuple[float, bool]:
    """Map a reward to a loss in [0, 1]; also report whether r had to be clipped."""
    bound = 1.0 + 3.0 * sigma
    clipped = not (-bound <= r <= bound)
    r = min(max(r, -bound), bound)
    return min(max((1.0 - r) / 2.0, 0.0), 1.0), clipped


def log_barrier_step(p: np.ndarray, eta: np.ndarray, losses: np.ndarray) -> np.ndarray:
    """Log-barrier OMD step: 1/p'_j = 1/p_j + eta_j (loss_j - lam), with lam normalising p'."""
    if len(p) == 1:
        return np.ones(1)
    inv_p = 1.0 / p

    def excess(lam: float) -> float:
        return float(np.sum(1.0 / (inv_p + eta * (losses - lam)))) - 1.0

    lo = float(losses.min())
    pole = float(np.min(losses + inv_p / eta))
    hi = float(losses.max())
    if hi >= pole:
        # the sum blows up at the pole, so some point just below it is a valid bracket end
        gap = pole - lo
        hi = pole - 0.5 * gap
        while excess(hi) < 0:
            gap *= 0.5
            hi = pole - 0.5 * gap
    if excess(lo) >= 0:
        lam = lo
    elif excess(hi) <= 0:
        lam = hi
    else:
        lam = brentq(excess, lo, hi, xtol=_LAMBDA_XTOL, rtol=4 * np.finfo(float).eps)
    q = 1.0 / (inv_p + eta * (losses - lam))
    return q / q.sum()


def corral_update(state: CorralState, chosen: int, loss: float) -> None:
    """Feed one importance-weighted loss to the master (mirror step, mixing, thresholds)."""
    losses = np.zeros(state.M)
    losses[chosen] = loss / state.p[chosen]
    p = log_barrier_step(state.p, state.eta, losses)
    p = (1.0 - state.gamma) * p + state.gamma / state.M
    state.p = p / p.sum()
    tripped = 1.0 / state.p > state.rho
    state.p_lower = np.where(tripped, state.p / 2.0, state.p_lower)
    state.rho = 1.0 / state.p_lower
    state.eta = np.where(tripped, state.eta * state.beta_mult, state.eta)
    state.t += 1


class _BinBase:
    """One bin of a :class:`UCBMeta` exposed as a stand-alone base algorithm."""

    def __init__(self, meta: UCBMeta, k: int):
        self.meta, self.k = meta, k

    def advance(self, oracle) -> tuple[np.ndarray, float, int]:
        return self.meta._advance(self.k, oracle)


class _MetaBase:
    """A doubling UCB-Meta exposed as a base algorithm."""

    def __init__(self, inner: DoublingUCBMeta):
        self.inner = inner

    def advance(self, oracle) -> tuple[np.ndarray, float, int]:
        return self.inner.play(oracle)


@dataclass
class SmoothedBase:
    inner: object
    action_log: list = field(default_factory=list)
    bin_log: list = field(default_factory=list)
    activations: int = 0

    @property
    def adv_count(self) -> int:
        return len(self.action_log)


def smooth_activate(sb: SmoothedBase, oracle, rng: np.random.Generator) -> tuple[np.ndarray, float, int]:
    """Activate a smoothed base once; returns (action, reward, bin of the action).

    At the tau-th activation the inner algorithm advances with probability
    1/tau (always on the first); otherwise a uniformly chosen logged action is
    replayed through the oracle and the inner algorithm is left untouched.
    """
    sb.activations += 1
    if rng.random() * sb.activations < 1.0:
        x, y, k = sb.inner.advance(oracle)
        sb.action_log.append(np.array(x, dtype=float))
        sb.bin_log.append(int(k))
        return x, y, k
    j = int(rng.integers(len(sb.action_log)))
    x = sb.action_log[j]
    return x, oracle(x), sb.bin_log[j]


class CorralStep(NamedTuple):
    index: int
    reward: float
    x: np.ndarray
    bin: int


def corral_step(state: CorralState, bases: list, oracle, rng: np.random.Generator, sigma: float) -> CorralStep:
    i = int(rng.choice(state.M, p=state.p)) if state.M > 1 else 0
    x, r, k = smooth_activate(bases[i], oracle, rng)
    loss, clipped = reward_to_loss(r, sigma)
    state.clipped += clipped
    corral_update(state, i, loss)
    return CorralStep(i, r, x, k)


@dataclass(frozen=True)
class AlphaGrid:
    R: float
    points: tuple

    @property
    def M(self) -> int:
        return len(self.points)


def alpha_grid(R: float, T: int) -> AlphaGrid:
    """Linear grid {R i / floor(ln T) : i = 1 .. floor(ln T)}."""
    if not (0 < R <= 2):
        raise ValueError("R must lie in (0, 2]")
    if T < 3:
        raise ValueError("alpha_grid needs T >= 3")
    count = math.floor(math.log(T))
    return AlphaGrid(float(R), tuple(R * i / count for i in range(1, count + 1)))


def adapt_learning_rate(d: int, R: float, T: int) -> float:
    return T ** (-(d + R) / (d + 2 * R)) / d


def _run_master(state: CorralState, bases: list, oracle: Oracle, f_star: float, T: int,
                rng: np.random.Generator, sigma: float, meta: dict) -> RegretTrace:
    start = len(oracle.values)
    chosen, bins, xs, ys = np.empty(T, dtype=int), np.empty(T, dtype=int), [], np.empty(T)
    for t in range(T):
        step = corral_step(state, bases, oracle, rng, sigma)
        chosen[t], bins[t], ys[t] = step.index, step.bin, step.reward
        xs.append(step.x)
    meta = dict(meta, clipped_rewards=state.clipped, final_p=state.p.tolist())
    return build_trace(oracle.values[start:], f_star, bins, np.array(xs), ys, chosen, meta)


def corral_meta_run(alpha: float, L: float, d: int, oracle: Oracle, f_star: float, T: int,
                    delta: float, sigma: float, rng: np.random.Generator, profile="paper",
                    eta_override: Optional[float] = None, points_per_side: Optional[int] = None) -> RegretTrace:
    """Corral over one smoothed LinUCB per bin, bins and epsilon as in UCB-Meta."""
    if T < 3:
        raise ConfigError("corral_meta needs T >= 3")
    grid_owner = UCBMeta(MetaConfig(alpha, L, d, T, delta, sigma, profile, points_per_side), rng)
    n = grid_owner.grid.n_eff
    eta = eta_override if eta_override is not None else math.sqrt(n / T) / grid_owner.fmap.dim
    bases = [SmoothedBase(_BinBase(grid_owner, k)) for k in range(n)]
    state = corral_init(n, eta, T)
    meta = {"algorithm": "corral_meta", "n_bins": n, "epsilon": grid_owner.epsilon, "eta": eta}
    return _run_master(state, bases, oracle, f_star, T, rng, sigma, meta)


def adapt_run(R: float, d: int, oracle: Oracle, f_star: float, T: int, delta: float, sigma: float,
              rng: np.random.Generator, L: float = 1.0, profile="paper",
              eta_override: Optional[float] = None, points_per_side: Optional[int] = None) -> RegretTrace:
    """Corral over smoothed doubling UCB-Meta bases, one per grid value of the input alpha.

    Each base gets fail probability delta / M.
    """
    if T < 3:
        raise ConfigError("adapt needs T >= 3")
    grid = alpha_grid(R, T)
    eta = eta_override if eta_override is not None else adapt_learning_rate(d, R, T)
    bases = [
        SmoothedBase(_MetaBase(DoublingUCBMeta(a, L, d, delta / grid.M, sigma, rng, profile, points_per_side)))
        for a in grid.points
    ]
    state = corral_init(grid.M, eta, T)
    meta = {"algorithm": "adapt", "alpha_grid": list(grid.points), "eta": eta}
    return _run_master(state, bases, oracle, f_star, T, rng, sigma, meta)
