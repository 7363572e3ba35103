"""Confidence-ellipsoid linear UCB that tolerates bounded misspecification.

The index of a feature vector phi after t - 1 observations is

    <phi, theta_hat> + sqrt(beta_t) ||A^{-1/2} phi|| + eps * sum_s |phi^T A^{-1} phi_s|

where the last sum runs over every past feature phi_s against the *current*
A^{-1}.  Actions are always taken from a finite candidate set, so the history
is kept as candidate indices and the bias sum is evaluated through per-candidate
pull counts; features outside the candidate set are stored verbatim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

BETA_PROFILES = {"paper": 128.0, "aggressive": 2.0}

_TIE_RTOL = 1e-12


def beta_const_for(profile) -> float:
    if isinstance(profile, (int, float)):
        return float(profile)
    try:
        return BETA_PROFILES[profile]
    except KeyError:
        raise ValueError(f"unknown beta profile {profile!r}; expected one of {sorted(BETA_PROFILES)}") from None


@dataclass
class LinUcbConfig:
    dim: int
    epsilon: float
    delta: float
    sigma: float
    kappa_sq: float
    candidates: np.ndarray
    beta_const: float = 128.0

    def __post_init__(self):
        self.candidates = np.atleast_2d(np.asarray(self.candidates, dtype=float))
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if not (0 < self.delta < 1):
            raise ValueError("delta must lie in (0, 1)")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.candidates.shape[0] == 0 or self.candidates.shape[1] != self.dim:
            raise ValueError(f"candidates must be a non-empty (K, {self.dim}) array")
        norms = np.einsum("ij,ij->i", self.candidates, self.candidates)
        if np.any(norms > self.kappa_sq * (1 + 1e-12)):
            raise ValueError("a candidate violates ||phi||^2 <= kappa_sq")


def beta(t: int, cfg: LinUcbConfig) -> float:
    """Ellipsoid radius C sigma^2 d' ln(1+t) ln(4 (t+1)^2 / delta)."""
    if t < 1:
        raise ValueError("t must be >= 1")
    return cfg.beta_const * cfg.sigma**2 * cfg.dim * math.log1p(t) * math.log(4.0 * (t + 1) ** 2 / cfg.delta)


def theorem1_rhs(T: int, cfg: LinUcbConfig) -> float:
    """High-probability regret bound of the misspecified LinUCB at horizon T."""
    if T < 1:
        raise ValueError("T must be >= 1")
    d, eps = cfg.dim, cfg.epsilon
    log_term = math.log1p(T)
    return (
        math.sqrt(8 * d * beta(T, cfg) * T * log_term)
        + 2 * eps * T * d * math.sqrt(2 * log_term)
        + 2 * eps * T
    )


class MisspecLinUCB:
    """State (A_t, b_t, theta_hat_t, history) of one misspecified LinUCB instance.

    ``t`` is the index of the next round, so a fresh instance has ``t == 1``
    and ``len(history) == t - 1`` always holds.
    """

    def __init__(self, cfg: LinUcbConfig, record: bool = False):
        self.cfg = cfg
        # optional per-step rows (t, candidate index, ucb value, y, ||theta_hat||) filled by ``step``
        self.log: Optional[list[tuple]] = [] if record else None
        self._pending_value = float("nan")
        dim = cfg.dim
        self.A = np.eye(dim)
        self.A_inv = np.eye(dim)
        self.bvec = np.zeros(dim)
        self.theta_hat = np.zeros(dim)
        self.t = 1
        self.counts = np.zeros(len(cfg.candidates))
        self.pending: Optional[int] = None
        self._hist_idx: list[int] = []
        self._extra: list[np.ndarray] = []

    @property
    def history(self) -> np.ndarray:
        """Past feature vectors phi_1 .. phi_{t-1} in play order."""
        rows = []
        extra = iter(self._extra)
        for idx in self._hist_idx:
            rows.append(self.cfg.candidates[idx] if idx >= 0 else next(extra))
        return np.array(rows).reshape(len(rows), self.cfg.dim)

    @property
    def beta_t(self) -> float:
        return beta(self.t, self.cfg)

    def _bias_sums(self, V: np.ndarray) -> np.ndarray:
        """sum_s |phi_s . v| for every column v of V (V = A^{-1} phi, shape (dim, m))."""
        out = np.abs(self.cfg.candidates @ V).T @ self.counts
        if self._extra:
            out = out + np.abs(np.array(self._extra) @ V).sum(axis=0)
        return out

    def ucb(self, phi) -> float:
        phi = np.asarray(phi, dtype=float)
        v = self.A_inv @ phi
        width = math.sqrt(self.beta_t * max(float(phi @ v), 0.0))
        bias = self.cfg.epsilon * float(self._bias_sums(v[:, None])[0]) if self.t > 1 else 0.0
        return float(phi @ self.theta_hat) + width + bias

    def ucb_all(self) -> np.ndarray:
        """Index of every candidate (vectorised ``ucb``)."""
        Phi = self.cfg.candidates
        V = self.A_inv @ Phi.T
        quad = np.einsum("ij,ji->i", Phi, V)
        values = Phi @ self.theta_hat + np.sqrt(self.beta_t * np.maximum(quad, 0.0))
        if self.t > 1 and self.cfg.epsilon > 0:
            values = values + self.cfg.epsilon * self._bias_sums(V)
        return values

    def select(self) -> tuple[int, float]:
        """Candidate maximising the index; exact (to rounding) ties go to the lowest index."""
        values = self.ucb_all()
        top = values.max()
        idx = int(np.flatnonzero(values >= top - _TIE_RTOL * max(1.0, abs(top)))[0])
        return idx, float(values[idx])

    def update(self, phi, y: float, index: Optional[int] = None) -> None:
        phi = np.asarray(phi, dtype=float)
        self.A += np.outer(phi, phi)
        self.bvec += y * phi
        self.A_inv = np.linalg.inv(self.A)
        self.theta_hat = np.linalg.solve(self.A, self.bvec)
        if index is None:
            self._hist_idx.append(-1)
            self._extra.append(phi.copy())
        else:
            self._hist_idx.append(index)
            self.counts[index] += 1
        self.t += 1

    def step(self, observe: Callable[[int], float], rng: np.random.Generator) -> tuple[int, float, float]:
        """Play the pending candidate, learn from it and pick the next one.

        The very first action is drawn uniformly from the candidates.  Returns
        (played index, observed reward, index value of the next action).
        """
        if self.pending is None:
            self.pending = int(rng.integers(len(self.cfg.candidates)))
            self._pending_value = self.ucb(self.cfg.candidates[self.pending])
        idx, t = self.pending, self.t
        y = observe(idx)
        self.update(self.cfg.candidates[idx], y, idx)
        if self.log is not None:
            self.log.append((t, idx, self._pending_value, float(y), float(np.linalg.norm(self.theta_hat))))
        self.pending, value = self.select()
        self._pending_value = value
        return idx, y, value
