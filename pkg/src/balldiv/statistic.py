"""The ball-divergence two-sample statistic.

For a labeling of the pooled sample into groups of sizes n (label 0) and
m (label 1), the statistic averages, over ordered same-group pairs (i, j),
the squared difference between the two groups' proportions inside the
ball centred at U_i with radius dist(U_j, U_i). Centre and radius points
are removed from their own group's proportion.

Two evaluators are provided: :func:`ball_statistic_fast` runs in O(N^2)
per labeling using a precomputed :class:`BallIndex`, and
:func:`ball_statistic_naive` is the direct triple loop used as its oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import DistanceSpec, PooledSample, check_labeling, pairwise_distances


@dataclass(frozen=True)
class StatisticValue:
    v1: float
    v2: float

    @property
    def t(self) -> float:
        return self.v1 + self.v2

    def __float__(self):
        return self.t


@dataclass(frozen=True, eq=False)
class BallIndex:
    """Pooled distances plus per-centre sorted orders and tie-inclusive ranks.

    Attributes
    ----------
    dist : (N, N) array
        Symmetric pairwise distances, zero diagonal.
    order : (N, N-1) int array
        ``order[i]`` is every other index sorted by distance to i, ties by index.
    tie_rank : (N, N) int array
        ``tie_rank[i, j]`` is the number of u != i with dist[u, i] <= dist[j, i].
    """

    n: int
    m: int
    dist: np.ndarray
    order: np.ndarray
    tie_rank: np.ndarray

    @property
    def N(self) -> int:
        return self.n + self.m


def index_from_distances(dist: np.ndarray, n: int, m: int) -> BallIndex:
    """Build a :class:`BallIndex` from a precomputed pooled distance matrix."""
    dist = np.ascontiguousarray(dist, dtype=np.float64)
    N = n + m
    if dist.shape != (N, N):
        raise ValueError(f"distance matrix must be {N}x{N}, got {dist.shape}")
    if n < 3 or m < 3:
        raise ValueError(f"need n, m >= 3 (got n={n}, m={m})")
    if not np.all(np.isfinite(dist)):
        raise ValueError("distance matrix contains non-finite entries (overflow?)")
    if np.any(np.diag(dist) != 0.0) or not np.array_equal(dist, dist.T):
        raise ValueError("distance matrix must be symmetric with a zero diagonal")
    order, tie_rank = _kernels.rank_structures(dist)
    for a in (dist, order, tie_rank):
        a.setflags(write=False)
    return BallIndex(n=n, m=m, dist=dist, order=order, tie_rank=tie_rank)


def build_index(pooled: PooledSample, spec: DistanceSpec) -> BallIndex:
    dist = pairwise_distances(pooled.pooled(), spec)
    return index_from_distances(dist, pooled.n, pooled.m)


def ball_statistic_fast(index: BallIndex, labels) -> StatisticValue:
    labels = check_labeling(labels, index.n, index.m)
    scratch = np.empty(2 * index.N + 1, dtype=np.int64)
    v1, v2 = _kernels.ball_statistic(index.order, index.tie_rank, labels, index.n, index.m, scratch)
    return StatisticValue(float(v1), float(v2))


def ball_statistic_naive(index: BallIndex, labels) -> StatisticValue:
    """Direct evaluation of the defining double sums, O(N^3)."""
    labels = check_labeling(labels, index.n, index.m)
    n, m = index.n, index.m
    D = index.dist
    xs = [i for i in range(index.N) if labels[i] == 0]
    ys = [i for i in range(index.N) if labels[i] == 1]

    def term(centers, same_size, other, other_size, same_first):
        total = 0.0
        for i in centers:
            for j in centers:
                if i == j:
                    continue
                radius = D[j, i]
                same = sum(1 for k in centers if k != i and k != j and D[k, i] <= radius)
                opp = sum(1 for k in other if D[k, i] <= radius)
                if same_first:
                    diff = same / (same_size - 2) - opp / other_size
                else:
                    diff = opp / other_size - same / (same_size - 2)
                total += diff * diff
        return total / (same_size * (same_size - 1))

    v1 = term(xs, n, ys, m, True)
    v2 = term(ys, m, xs, n, False)
    return StatisticValue(v1, v2)


def ball_statistic(x, y, spec: DistanceSpec | str = "l2") -> StatisticValue:
    """Convenience: statistic for two samples as given."""
    if isinstance(spec, str):
        spec = DistanceSpec.from_name(spec)
    pooled = PooledSample(x, y)
    return ball_statistic_fast(build_index(pooled, spec), pooled.identity_labels())
