"""Synthetic Hölder-smooth reward functions and the noisy zeroth-order oracle.

Three families are provided:

* ``PowerBump``   f(x) = h - (L/d) * sum_i |x_i - x*_i|^alpha, any alpha in (0, 2]
* ``Quadratic``   f(x) = h - (x - x*)^T Q (x - x*), exactly alpha = 2
* ``TrigMixture`` f(x) = offset + sum_k a_k cos(2 pi <w_k, x> + phase_k), C-infinity

Every function carries the Hölder constant that is actually valid for its
family (``certified_L``), which may exceed the nominal ``holder_const`` by the
recorded ``params["holder_factor"]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np


class FunctionKind(str, Enum):
    POWER_BUMP = "power_bump"
    QUADRATIC = "quadratic"
    TRIG_MIXTURE = "trig_mixture"


class NoiseKind(str, Enum):
    GAUSSIAN = "gaussian"
    UNIFORM_BOUNDED = "uniform"


class CertificateMethod(str, Enum):
    ANALYTIC = "analytic"
    GRID_REFINED = "grid_refined"


_DOMAIN_TOL = 1e-12
_MAX_GRID_POINTS = 5_000_000


@dataclass(frozen=True)
class HolderFunction:
    kind: FunctionKind
    d: int
    alpha: float
    holder_const: float
    params: dict = field(default_factory=dict)
    x_star: Optional[np.ndarray] = None
    f_star: Optional[float] = None

    @property
    def taylor_degree(self) -> int:
        """Largest integer strictly below alpha."""
        return math.ceil(self.alpha) - 1

    @property
    def certified_L(self) -> float:
        return self.holder_const * self.params.get("holder_factor", 1.0)

    def __call__(self, x) -> float:
        return evaluate(self, x)


@dataclass(frozen=True)
class NoiseModel:
    sigma: float
    distribution: NoiseKind = NoiseKind.GAUSSIAN

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")

    def draw(self, rng: np.random.Generator, size=None):
        if self.distribution == NoiseKind.GAUSSIAN:
            return rng.normal(0.0, self.sigma, size=size)
        return rng.uniform(-self.sigma, self.sigma, size=size)


@dataclass(frozen=True)
class OptimumCertificate:
    x_star: np.ndarray
    f_star: float
    method: CertificateMethod
    resolution: Optional[float] = None
    error_bound: float = 0.0


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha <= 2.0):
        raise ValueError(f"alpha must lie in (0, 2], got {alpha}")


def _as_point(x, d: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.shape != (d,):
        raise ValueError(f"expected a point of dimension {d}, got shape {arr.shape}")
    if np.any(arr < -_DOMAIN_TOL) or np.any(arr > 1.0 + _DOMAIN_TOL):
        raise ValueError(f"point {arr} lies outside [0, 1]^{d}")
    return arr


def power_bump_factor(alpha: float) -> float:
    """Taylor-remainder constant of u -> |u|^alpha relative to |h|^alpha.

    For alpha <= 1 the degree-0 remainder is bounded by |h|^alpha directly.
    For alpha in (1, 2] integrating the (alpha-1)-Hölder derivative gives
    2^(2 - alpha).
    """
    if alpha <= 1.0:
        return 1.0
    return 2.0 ** (2.0 - alpha)


def make_power_bump(d: int, alpha: float, L: float = 1.0, x_star=None, h: float = 1.0) -> HolderFunction:
    _check_alpha(alpha)
    if d < 1:
        raise ValueError("d must be >= 1")
    if L <= 0:
        raise ValueError("L must be positive")
    if x_star is None:
        x_star = np.full(d, 0.5)
    x_star = _as_point(x_star, d).copy()
    # min of f over the cube is h - (L/d) * sum_i max(x*_i, 1 - x*_i)^alpha
    worst = (L / d) * float(np.sum(np.maximum(x_star, 1.0 - x_star) ** alpha))
    if h > 1.0 or h - worst < -1.0:
        raise ValueError(f"peak h={h} with L={L} violates |f| <= 1 on the cube")
    params = {"h": float(h), "holder_factor": power_bump_factor(alpha)}
    return HolderFunction(FunctionKind.POWER_BUMP, d, float(alpha), float(L), params, x_star, float(h))


def make_quadratic(d: int, L: float = 1.0, x_star=None, h: float = 1.0, Q=None) -> HolderFunction:
    """Quadratic bump; the certified constant is sum_ij |Q_ij| (defaults to Q = (L/d) I)."""
    if x_star is None:
        x_star = np.full(d, 0.5)
    x_star = _as_point(x_star, d).copy()
    if Q is None:
        Q = np.eye(d) * (L / d)
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (d, d) or not np.allclose(Q, Q.T):
        raise ValueError("Q must be a symmetric d x d matrix")
    if np.linalg.eigvalsh(Q).min() < -1e-12:
        raise ValueError("Q must be positive semi-definite")
    corners = np.array(np.meshgrid(*[[0.0, 1.0]] * d, indexing="ij")).reshape(d, -1).T
    diffs = corners - x_star
    worst = float(np.max(np.einsum("ni,ij,nj->n", diffs, Q, diffs)))
    if h > 1.0 or h - worst < -1.0:
        raise ValueError(f"peak h={h} with Q violates |f| <= 1 on the cube")
    certified = float(np.abs(Q).sum())
    params = {"h": float(h), "Q": Q, "holder_factor": certified / L}
    return HolderFunction(FunctionKind.QUADRATIC, d, 2.0, float(L), params, x_star, float(h))


def make_trig_mixture(
    d: int,
    amplitudes: Sequence[float],
    frequencies,
    phases: Optional[Sequence[float]] = None,
    offset: float = 0.0,
    alpha: float = 2.0,
) -> HolderFunction:
    """Cosine mixture, amplitudes rescaled so that |offset| + sum |a_k| <= 1.

    ``alpha`` is the nominal smoothness the function is advertised with; the
    returned ``holder_const`` is a valid constant for that exponent.
    """
    _check_alpha(alpha)
    amps = np.asarray(amplitudes, dtype=float).ravel()
    freqs = np.asarray(frequencies, dtype=float).reshape(len(amps), d)
    ph = np.zeros(len(amps)) if phases is None else np.asarray(phases, dtype=float).ravel()
    total = abs(offset) + float(np.abs(amps).sum())
    if total > 1.0:
        scale = 1.0 / total
        amps = amps * scale
        offset = offset * scale
    l = math.ceil(alpha) - 1
    # |R_l(h)| <= sum_k |a_k| (2 pi |w_k|_1 |h|_inf)^(l+1) / (l+1)!  and |h|_inf <= 1
    L = float(np.sum(np.abs(amps) * (2 * np.pi * np.abs(freqs).sum(axis=1)) ** (l + 1)) / math.factorial(l + 1))
    L = max(L, 1e-12)
    params = {"amplitudes": amps, "frequencies": freqs, "phases": ph, "offset": float(offset), "holder_factor": 1.0}
    return HolderFunction(FunctionKind.TRIG_MIXTURE, d, float(alpha), L, params, None, None)


def evaluate_many(f: HolderFunction, X) -> np.ndarray:
    """Noiseless values at the rows of ``X`` (no domain check)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    p = f.params
    if f.kind == FunctionKind.POWER_BUMP:
        return p["h"] - (f.holder_const / f.d) * np.sum(np.abs(X - f.x_star) ** f.alpha, axis=1)
    if f.kind == FunctionKind.QUADRATIC:
        D = X - f.x_star
        return p["h"] - np.einsum("ni,ij,nj->n", D, p["Q"], D)
    arg = 2 * np.pi * X @ p["frequencies"].T + p["phases"]
    return p["offset"] + np.cos(arg) @ p["amplitudes"]


def evaluate(f: HolderFunction, x) -> float:
    x = _as_point(x, f.d)
    p = f.params
    if f.kind == FunctionKind.POWER_BUMP:
        # scalar fast path for d == 1, the hot loop of every simulation
        if f.d == 1:
            return p["h"] - f.holder_const * abs(x[0] - f.x_star[0]) ** f.alpha
        return float(p["h"] - (f.holder_const / f.d) * np.sum(np.abs(x - f.x_star) ** f.alpha))
    return float(evaluate_many(f, x[None, :])[0])


def gradient(f: HolderFunction, x) -> np.ndarray:
    """Analytic gradient, used to build first-order Taylor polynomials."""
    x = _as_point(x, f.d)
    p = f.params
    if f.kind == FunctionKind.POWER_BUMP:
        u = x - f.x_star
        return -(f.holder_const / f.d) * f.alpha * np.abs(u) ** (f.alpha - 1) * np.sign(u)
    if f.kind == FunctionKind.QUADRATIC:
        return -2.0 * p["Q"] @ (x - f.x_star)
    arg = 2 * np.pi * p["frequencies"] @ x + p["phases"]
    return -(2 * np.pi) * (p["amplitudes"] * np.sin(arg)) @ p["frequencies"]


def taylor_polynomial(f: HolderFunction, y, x) -> float:
    """T_y^l(x) with l the largest integer strictly below alpha (l <= 1 here)."""
    y = _as_point(y, f.d)
    x = _as_point(x, f.d)
    value = evaluate(f, y)
    if f.taylor_degree >= 1:
        value += float(gradient(f, y) @ (x - y))
    return value


def sample_reward(f: HolderFunction, x, noise: NoiseModel, rng: np.random.Generator) -> float:
    """One noisy observation y = f(x) + eta."""
    value = evaluate(f, x)
    if noise.sigma == 0:
        return value
    return value + float(noise.draw(rng))


def _golden_max(g, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200):
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, e = b - invphi * (b - a), a + invphi * (b - a)
    gc, ge = g(c), g(e)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if gc >= ge:
            b, e, ge = e, c, gc
            c = b - invphi * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, e, ge
            e = a + invphi * (b - a)
            ge = g(e)
    candidates = [(gc, c), (ge, e), (g(a), a), (g(b), b)]
    return max(candidates)


def true_max(f: HolderFunction, resolution: float = 1e-3) -> OptimumCertificate:
    """Certified maximiser: analytic where the family allows, else grid scan + golden refinement."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if f.kind in (FunctionKind.POWER_BUMP, FunctionKind.QUADRATIC):
        return OptimumCertificate(f.x_star.copy(), float(f.f_star), CertificateMethod.ANALYTIC)

    error_bound = f.certified_L * resolution ** min(f.alpha, 1.0)
    if error_bound > 0.1:
        raise ValueError(
            f"resolution {resolution} too coarse: error bound {error_bound:.3g} exceeds 0.1; "
            "use a finer resolution"
        )
    m = int(math.ceil(1.0 / resolution)) + 1
    if m ** f.d > _MAX_GRID_POINTS:
        raise ValueError(f"grid of {m}^{f.d} points is too large; use a coarser resolution")
    axis = np.linspace(0.0, 1.0, m)
    grid = np.stack(np.meshgrid(*[axis] * f.d, indexing="ij"), axis=-1).reshape(-1, f.d)
    values = evaluate_many(f, grid)
    best = grid[int(np.argmax(values))].copy()
    best_val = float(values.max())
    step = 1.0 / (m - 1)
    # two sweeps of coordinatewise golden-section refinement
    for _ in range(2):
        for i in range(f.d):
            lo, hi = max(0.0, best[i] - step), min(1.0, best[i] + step)

            def g(t, i=i):
                z = best.copy()
                z[i] = t
                return float(evaluate_many(f, z[None, :])[0])

            val, t = _golden_max(g, lo, hi)
            if val > best_val:
                best_val, best[i] = val, t
    return OptimumCertificate(best, best_val, CertificateMethod.GRID_REFINED, resolution, error_bound)


def certify(f: HolderFunction, resolution: float = 1e-4) -> HolderFunction:
    """Return ``f`` with x_star/f_star filled in from ``true_max``."""
    if f.f_star is not None:
        return f
    cert = true_max(f, resolution)
    return HolderFunction(f.kind, f.d, f.alpha, f.holder_const, f.params, cert.x_star, cert.f_star)


class Oracle:
    """Noisy zeroth-order oracle y = f(x) + eta with a private RNG.

    Noise is pre-drawn in blocks from the generator, so the reward stream is a
    deterministic function of (seed, query sequence).  Every query records the
    noiseless value, which is what pseudo-regret is computed from.
    """

    _BLOCK = 4096

    def __init__(self, f: HolderFunction, noise: NoiseModel, rng: np.random.Generator, record: bool = True):
        self.f = f
        self.noise = noise
        self.rng = rng
        self.record = record
        self.calls = 0
        self.values: list[float] = []
        self._buf = np.empty(0)
        self._pos = 0

    def _eta(self) -> float:
        if self.noise.sigma == 0:
            return 0.0
        if self._pos >= len(self._buf):
            self._buf = self.noise.draw(self.rng, self._BLOCK)
            self._pos = 0
        eta = self._buf[self._pos]
        self._pos += 1
        return float(eta)

    def __call__(self, x) -> float:
        value = evaluate(self.f, x)
        self.calls += 1
        if self.record:
            self.values.append(value)
        return value + self._eta()
