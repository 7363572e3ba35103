"""Local polynomial feature maps.

A bin of side ``s`` centred at ``c`` is mapped to local coordinates
``u = (x - c) / s`` in [-1/2, 1/2]^d, and ``phi(u)`` collects the monomials
``u^s`` for every multi-index with ``|s| <= l``.  The constant monomial comes
first, so ``phi`` always carries an intercept and every coordinate has
magnitude at most one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Tuple

import numpy as np

MultiIndex = Tuple[int, ...]

_MAX_FEATURES = 1_000_000
_BIN_TOL = 1e-9


def feature_dim(d: int, l: int) -> int:
    if d < 1 or l < 0:
        raise ValueError(f"need d >= 1 and l >= 0, got d={d}, l={l}")
    total = 1
    for j in range(1, l + 1):
        total += math.comb(j + d - 1, d - 1)
        if total > _MAX_FEATURES:
            raise OverflowError(f"feature dimension for d={d}, l={l} exceeds {_MAX_FEATURES}")
    return total


def degree_for(alpha: float) -> int:
    """Largest integer strictly smaller than alpha."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return math.ceil(alpha) - 1


def multi_indices(d: int, l: int) -> list[MultiIndex]:
    """All s with |s| <= l in graded lexicographic order (x1 > x2 > ... within a degree)."""
    feature_dim(d, l)  # overflow guard
    out: list[MultiIndex] = []
    for degree in range(l + 1):
        level = [s for s in product(range(degree + 1), repeat=d) if sum(s) == degree]
        out.extend(sorted(level, reverse=True))
    return out


@dataclass(frozen=True)
class FeatureMap:
    d: int
    degree: int
    indices: tuple
    exponents: np.ndarray  # (dim, d) integer matrix, one row per multi-index

    @property
    def dim(self) -> int:
        return len(self.indices)

    @property
    def kappa_sq(self) -> float:
        """Bound on ||phi(u)||^2 over the local cube."""
        return float(self.dim)

    def labels(self) -> list[str]:
        return ["s=(" + ",".join(str(v) for v in s) + ")" for s in self.indices]

    def local(self, U) -> np.ndarray:
        """Features of local coordinates; ``U`` has shape (n, d) or (d,)."""
        U = np.asarray(U, dtype=float)
        single = U.ndim == 1
        U = np.atleast_2d(U)
        out = np.prod(U[:, None, :] ** self.exponents[None, :, :], axis=2)
        return out[0] if single else out


def build_feature_map(d: int, alpha: float) -> FeatureMap:
    l = degree_for(alpha)
    idx = multi_indices(d, l)
    return FeatureMap(d, l, tuple(idx), np.array(idx, dtype=int).reshape(len(idx), d))


def to_local(bin_center, bin_side: float, x) -> np.ndarray:
    center = np.atleast_1d(np.asarray(bin_center, dtype=float))
    u = (np.atleast_1d(np.asarray(x, dtype=float)) - center) / bin_side
    if np.any(np.abs(u) > 0.5 + _BIN_TOL):
        raise ValueError(f"point {x} lies outside the bin centred at {center} with side {bin_side}")
    return u


def featurize(fmap: FeatureMap, bin_center, bin_side: float, x) -> np.ndarray:
    return fmap.local(to_local(bin_center, bin_side, x))
