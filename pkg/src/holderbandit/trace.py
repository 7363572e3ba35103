from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


class ConfigError(ValueError):
    """Invalid algorithm or experiment configuration."""


@dataclass
class RegretTrace:
    """Per-step record of one run; ``cum_regret[t-1]`` is the pseudo-regret after t queries."""

    cum_regret: np.ndarray
    bins: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    chosen_base: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.cum_regret)

    @property
    def final_regret(self) -> float:
        return float(self.cum_regret[-1]) if len(self.cum_regret) else 0.0

    def at(self, t: int) -> float:
        """Cumulative regret after the first ``t`` queries."""
        return float(self.cum_regret[t - 1]) if t > 0 else 0.0

    def prefix(self, t: int) -> "RegretTrace":
        cb = None if self.chosen_base is None else self.chosen_base[:t]
        return RegretTrace(self.cum_regret[:t], self.bins[:t], self.xs[:t], self.ys[:t], cb, dict(self.meta))


def build_trace(values, f_star: float, bins, xs, ys, chosen_base=None, meta=None) -> RegretTrace:
    """Assemble a trace from the noiseless values of every query.

    Gaps are clipped at zero: a certified optimum can undershoot the true
    maximum by its (tiny) certificate error.
    """
    gaps = np.maximum(f_star - np.asarray(values, dtype=float), 0.0)
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 1:
        xs = xs[:, None]
    cb = None if chosen_base is None else np.asarray(chosen_base, dtype=int)
    return RegretTrace(np.cumsum(gaps), np.asarray(bins, dtype=int), xs, np.asarray(ys, dtype=float), cb, dict(meta or {}))
