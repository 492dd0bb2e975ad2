"""Compiled kernels for distances, ball-index construction and the permutation loop.

Everything here works on plain arrays; the public wrappers live in
:mod:`balldiv.core`, :mod:`balldiv.statistic` and :mod:`balldiv.permute`.
"""

import math

import numba
import numpy as np
from numba import njit, prange

# Prefer OpenMP; skipping TBB first avoids a version warning on older TBB installs.
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

# Distance kind codes shared with core.DistanceKind.
L2 = 0
L1 = 1
EXP = 2
LOG = 3

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO_M53 = 1.0 / 9007199254740992.0


# ---------------------------------------------------------------------------
# generalized distance
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _psi_sum(a, b, kind):
    d = a.shape[0]
    s = 0.0
    if kind == L2:
        for q in range(d):
            g = a[q] - b[q]
            s += g * g
    elif kind == L1:
        # sqrt(g * g) == |g|, without under/overflow in the square
        for q in range(d):
            s += abs(a[q] - b[q])
    elif kind == EXP:
        for q in range(d):
            g = a[q] - b[q]
            s += -math.expm1(-0.5 * (g * g))
    else:
        for q in range(d):
            g = a[q] - b[q]
            s += math.log1p(g * g)
    return s


@njit(cache=True)
def psi_mean(a, b, kind):
    """Coordinate average of psi(|a_q - b_q|^2), before h is applied."""
    return _psi_sum(a, b, kind) / a.shape[0]


@njit(cache=True)
def apply_h(s, kind):
    if kind == L2:
        return math.sqrt(s)
    return s


@njit(cache=True)
def pair_distance(a, b, kind):
    return apply_h(psi_mean(a, b, kind), kind)


@njit(cache=True, parallel=True)
def pairwise_matrix(u, kind, with_h):
    """Symmetric matrix of psi-means (or distances) with an exact zero diagonal."""
    N = u.shape[0]
    out = np.zeros((N, N))
    for i in prange(N):
        for j in range(i + 1, N):
            v = psi_mean(u[i], u[j], kind)
            if with_h:
                v = apply_h(v, kind)
            out[i, j] = v
            out[j, i] = v
    return out


@njit(cache=True, parallel=True)
def cross_matrix(x, y, kind, with_h):
    n = x.shape[0]
    m = y.shape[0]
    out = np.empty((n, m))
    for i in prange(n):
        for j in range(m):
            v = psi_mean(x[i], y[j], kind)
            if with_h:
                v = apply_h(v, kind)
            out[i, j] = v
    return out


@njit(cache=True, parallel=True)
def rowwise_distances(a, b, kind):
    M = a.shape[0]
    out = np.empty(M)
    for i in prange(M):
        out[i] = pair_distance(a[i], b[i], kind)
    return out


# ---------------------------------------------------------------------------
# ball index
# ---------------------------------------------------------------------------

@njit(cache=True, parallel=True)
def rank_structures(dist):
    """Per-center sorted neighbour order and tie-inclusive prefix ranks.

    ``order[i]`` lists the other N-1 indices by ascending distance to i,
    ties by ascending index. ``tie_rank[i, j]`` counts u != i with
    dist[u, i] <= dist[j, i]; the diagonal is left at 0.
    """
    N = dist.shape[0]
    order = np.empty((N, N - 1), dtype=np.int64)
    tie_rank = np.zeros((N, N), dtype=np.int64)
    for i in prange(N):
        row = dist[i]
        full = np.argsort(row, kind="mergesort")
        r = 0
        for t in range(N):
            if full[t] != i:
                order[i, r] = full[t]
                r += 1
        # walk backwards so each tie group receives the index of its last member
        last = N - 1
        for t in range(N - 2, -1, -1):
            if t < N - 2 and row[order[i, t]] != row[order[i, t + 1]]:
                last = t + 1
            tie_rank[i, order[i, t]] = last
    return order, tie_rank


# ---------------------------------------------------------------------------
# ball statistic
# ---------------------------------------------------------------------------

@njit(cache=True)
def ball_statistic(order, tie_rank, labels, n, m, cx):
    """Return (V1, V2) for one labeling; ``cx`` is int scratch of length 2N + 1."""
    N = labels.shape[0]
    members = cx[N + 1:]
    # group-0 indices first, then group-1, each ascending
    a = 0
    b = n
    for i in range(N):
        if labels[i] == 0:
            members[a] = i
            a += 1
        else:
            members[b] = i
            b += 1
    s1 = 0.0
    s2 = 0.0
    inv_n = 1.0 / n
    inv_m = 1.0 / m
    inv_n2 = 1.0 / (n - 2)
    inv_m2 = 1.0 / (m - 2)
    for i in range(N):
        oi = order[i]
        c = 0
        cx[0] = 0
        for r in range(N - 1):
            c += 1 - labels[oi[r]]
            cx[r + 1] = c
        ri = tie_rank[i]
        if labels[i] == 0:
            for t in range(n):
                j = members[t]
                if j == i:
                    continue
                r = ri[j]
                k = cx[r]
                diff = (k - 1) * inv_n2 - (r - k) * inv_m
                s1 += diff * diff
        else:
            for t in range(n, N):
                j = members[t]
                if j == i:
                    continue
                r = ri[j]
                k = cx[r]
                diff = k * inv_n - (r - k - 1) * inv_m2
                s2 += diff * diff
    return s1 / (n * (n - 1)), s2 / (m * (m - 1))


@njit(cache=True, parallel=True)
def statistics_for_labelings(order, tie_rank, labelings, n, m):
    K = labelings.shape[0]
    N = labelings.shape[1]
    out = np.empty(K)
    for b in prange(K):
        cx = np.empty(2 * N + 1, dtype=np.int64)
        v1, v2 = ball_statistic(order, tie_rank, labelings[b], n, m, cx)
        out[b] = v1 + v2
    return out


# ---------------------------------------------------------------------------
# SplitMix64 substreams and random relabeling
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def substream_key(seed, k):
    """k-th output of a SplitMix64 generator started at ``seed``."""
    return mix64(seed + (np.uint64(k) + np.uint64(1)) * _GOLDEN)


@njit(cache=True)
def shuffle_labels(labels, key):
    """Fisher-Yates shuffle in place, driven by a SplitMix64 stream at ``key``."""
    state = key
    for i in range(labels.shape[0] - 1, 0, -1):
        state = state + _GOLDEN
        u = np.float64(mix64(state) >> _S11) * _TWO_M53
        j = int(u * (i + 1))
        tmp = labels[i]
        labels[i] = labels[j]
        labels[j] = tmp


@njit(cache=True, parallel=True)
def random_replicates(order, tie_rank, n, m, seed, B):
    N = n + m
    out = np.empty(B)
    for b in prange(B):
        labels = np.zeros(N, dtype=np.int8)
        labels[n:] = 1
        shuffle_labels(labels, substream_key(seed, b))
        cx = np.empty(2 * N + 1, dtype=np.int64)
        v1, v2 = ball_statistic(order, tie_rank, labels, n, m, cx)
        out[b] = v1 + v2
    return out


@njit(cache=True)
def replicate_labeling(n, m, seed, b):
    labels = np.zeros(n + m, dtype=np.int8)
    labels[n:] = 1
    shuffle_labels(labels, substream_key(seed, b))
    return labels
