"""Monte Carlo and closed-form oracles for population quantities.

The population ball divergence and the exact mean of the ball statistic are
both linear in six probabilities of distance-ordering events among three
independent draws from each of F and G. :func:`estimate_probability_profile`
estimates all six from shared draws, so every linear combination has an
exact replicate-level standard error from the 6x6 indicator covariance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import DistanceSpec, as_data_matrix, cross_psi_mean_matrix, psi_mean_matrix, rowwise_distances
from .rng import generator

CHUNK = 65_536
THETA_OFFSET = 2.0 / 3.0
# theta^2 = p1 + p3 - 2 p4 - 2 p5 + 2/3
THETA_COEFS = np.array([0.0, 1.0, 0.0, 1.0, -2.0, -2.0])
DEFAULT_BOOTSTRAP = 200


@dataclass(frozen=True, eq=False)
class ProbabilityProfile:
    """Six event probabilities with their Monte Carlo uncertainty.

    Attributes
    ----------
    p : (6,) array
        Estimates of p0..p5.
    M : int
        Number of shared-draw replicates (0 for a profile given exactly).
    cov : (6, 6) array
        Replicate-level covariance of the six indicators; zero for exact profiles.
    """

    p: np.ndarray
    M: int
    cov: np.ndarray

    @classmethod
    def exact(cls, p) -> "ProbabilityProfile":
        p = np.array(p, dtype=float)
        if p.shape != (6,):
            raise ValueError("a profile needs exactly six probabilities")
        if np.any((p < 0) | (p > 1)):
            raise ValueError("probabilities must lie in [0, 1]")
        p.setflags(write=False)
        return cls(p, 0, np.zeros((6, 6)))

    p0 = property(lambda self: float(self.p[0]))
    p1 = property(lambda self: float(self.p[1]))
    p2 = property(lambda self: float(self.p[2]))
    p3 = property(lambda self: float(self.p[3]))
    p4 = property(lambda self: float(self.p[4]))
    p5 = property(lambda self: float(self.p[5]))

    @property
    def standard_errors(self) -> np.ndarray:
        """Binomial standard errors sqrt(p(1-p)/M) of each probability."""
        if self.M == 0:
            return np.zeros(6)
        return np.sqrt(self.p * (1.0 - self.p) / self.M)

    def linear_se(self, coefs) -> float:
        """Standard error of sum_k coefs[k] * p_k."""
        if self.M == 0:
            return 0.0
        c = np.asarray(coefs, dtype=float)
        return math.sqrt(max(float(c @ self.cov @ c), 0.0) / self.M)


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class ThetaEstimate:
    """Ball divergence estimate; ``raw`` is before clamping to [0, 2]."""

    value: float
    raw: float
    se: float
    clamped: bool

    def __float__(self):
        return self.value


def _event_indicators(x1, x2, x3, y1, y2, y3, spec: DistanceSpec) -> np.ndarray:
    d_x2x1 = rowwise_distances(x2, x1, spec)
    d_y1x1 = rowwise_distances(y1, x1, spec)
    d_y2x1 = rowwise_distances(y2, x1, spec)
    d_x3x1 = rowwise_distances(x3, x1, spec)
    d_y2y1 = rowwise_distances(y2, y1, spec)
    d_x2y1 = rowwise_distances(x2, y1, spec)
    d_y3y1 = rowwise_distances(y3, y1, spec)
    # rho(X1, Y1) == rho(Y1, X1) by symmetry
    e0 = d_y1x1 <= d_x2x1
    e2 = d_y1x1 <= d_y2y1
    return np.stack(
        [
            e0,
            e0 & (d_y2x1 <= d_x2x1),
            e2,
            e2 & (d_x2y1 <= d_y2y1),
            e0 & (d_x3x1 <= d_x2x1),
            e2 & (d_y3y1 <= d_y2y1),
        ],
        axis=1,
    ).astype(np.float64)


def estimate_probability_profile(f, g, spec: DistanceSpec | str, M: int, seed: int = 0) -> ProbabilityProfile:
    """Estimate p0..p5 from M replicates of shared draws X1..X3 ~ F, Y1..Y3 ~ G.

    Replicates are generated in fixed chunks, each of the six points in a
    chunk drawn from its own seeded stream, so the result depends only on
    (f, g, spec, M, seed).
    """
    if isinstance(spec, str):
        spec = DistanceSpec.from_name(spec)
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if f.dim != g.dim:
        raise ValueError(f"F and G dimensions differ: {f.dim} vs {g.dim}")
    sums = np.zeros(6)
    cross = np.zeros((6, 6))
    done = 0
    chunk = 0
    while done < M:
        k = min(CHUNK, M - done)
        pts = [
            s.sample(generator(seed, "profile", chunk, role), k)
            for s, role in ((f, "X1"), (f, "X2"), (f, "X3"), (g, "Y1"), (g, "Y2"), (g, "Y3"))
        ]
        ind = _event_indicators(*pts, spec)
        sums += ind.sum(axis=0)
        cross += ind.T @ ind
        done += k
        chunk += 1
    p = sums / M
    cov = cross / M - np.outer(p, p)
    if M > 1:
        cov *= M / (M - 1)
    p.setflags(write=False)
    cov.setflags(write=False)
    return ProbabilityProfile(p, M, cov)


def theta_estimate(profile: ProbabilityProfile) -> ThetaEstimate:
    """Ball divergence p1 + p3 - 2 p4 - 2 p5 + 2/3, clamped to [0, 2]."""
    raw = float(THETA_COEFS @ profile.p + THETA_OFFSET)
    value = min(max(raw, 0.0), 2.0)
    return ThetaEstimate(value, raw, profile.linear_se(THETA_COEFS), value != raw)


def _expected_coefs(n, m):
    # (1/m)(p0 - p1) + (1/n)(p2 - p3) + theta^2
    return np.array([1.0 / m, -1.0 / m, 1.0 / n, -1.0 / n, 0.0, 0.0]) + THETA_COEFS


def expected_statistic(n: int, m: int, profile: ProbabilityProfile) -> float:
    """Exact finite-sample mean of the ball statistic for sample sizes (n, m)."""
    if n < 3 or m < 3:
        raise ValueError(f"need n, m >= 3 (got n={n}, m={m})")
    base = (1.0 / (n - 2) + 1.0 / (m - 2)) / 6.0
    return float(base + _expected_coefs(n, m) @ profile.p + THETA_OFFSET)


def expected_statistic_se(n: int, m: int, profile: ProbabilityProfile) -> float:
    if n < 3 or m < 3:
        raise ValueError(f"need n, m >= 3 (got n={n}, m={m})")
    return profile.linear_se(_expected_coefs(n, m))


def theta_lower_bound(profile: ProbabilityProfile) -> Estimate:
    """(p0 - 1/2)^2 + (p2 - 1/2)^2 with a delta-method standard error."""
    a, b = profile.p0 - 0.5, profile.p2 - 0.5
    grad = np.array([2 * a, 0.0, 2 * b, 0.0, 0.0, 0.0])
    return Estimate(a * a + b * b, profile.linear_se(grad))


def lower_bound_gap(profile: ProbabilityProfile) -> Estimate:
    """Unclamped ball divergence minus its lower bound, with the SE of the difference."""
    a, b = profile.p0 - 0.5, profile.p2 - 0.5
    raw = theta_estimate(profile).raw
    grad = THETA_COEFS - np.array([2 * a, 0.0, 2 * b, 0.0, 0.0, 0.0])
    return Estimate(raw - (a * a + b * b), profile.linear_se(grad))


def separation_rate(n: float, m: float) -> float:
    """(n^-1/2 + m^-1/2)^2."""
    if n < 1 or m < 1:
        raise ValueError(f"need n, m >= 1 (got n={n}, m={m})")
    return (1.0 / math.sqrt(n) + 1.0 / math.sqrt(m)) ** 2


# ---------------------------------------------------------------------------
# energy distance
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnergyEstimate:
    value: float
    se: float
    cross: float
    within_x: float
    within_y: float

    def __float__(self):
        return self.value


def _energy_from_weights(C, A, B, wx, wy):
    # pairs of the same original row are dropped; diagonals of A, B are 0
    cross = wx @ C @ wy / (wx.sum() * wy.sum())
    within_x = wx @ A @ wx / (wx.sum() ** 2 - (wx * wx).sum())
    within_y = wy @ B @ wy / (wy.sum() ** 2 - (wy * wy).sum())
    return cross, within_x, within_y


def energy_distance_estimate(
    x,
    y,
    spec: DistanceSpec | str = "l2",
    n_boot: int = DEFAULT_BOOTSTRAP,
    seed: int = 0,
) -> EnergyEstimate:
    """Plug-in estimate of 2 phi*(F, G) - phi*(F, F) - phi*(G, G).

    Each phi* applies h to the mean over pairs of the coordinate-averaged
    psi values; within-sample means use unordered distinct pairs. The
    standard error is the spread of ``n_boot`` row-bootstrap replicates.
    """
    if isinstance(spec, str):
        spec = DistanceSpec.from_name(spec)
    x = as_data_matrix(x, "x")
    y = as_data_matrix(y, "y")
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    if x.shape[0] < 2 or y.shape[0] < 2:
        raise ValueError("energy distance needs at least 2 rows in each sample")
    C = cross_psi_mean_matrix(x, y, spec)
    A = psi_mean_matrix(x, spec)
    B = psi_mean_matrix(y, spec)

    def combine(parts):
        c, wx, wy = (float(spec.apply_h(t)) for t in parts)
        return 2.0 * c - wx - wy

    n, m = x.shape[0], y.shape[0]
    parts = _energy_from_weights(C, A, B, np.ones(n), np.ones(m))
    value = combine(parts)
    se = 0.0
    if n_boot > 0:
        rng = generator(seed, "energy-bootstrap")
        reps = np.empty(n_boot)
        for b in range(n_boot):
            wx = np.bincount(rng.integers(0, n, n), minlength=n).astype(float)
            wy = np.bincount(rng.integers(0, m, m), minlength=m).astype(float)
            if (wx * wx).sum() == n * n or (wy * wy).sum() == m * m:
                # a resample made of one repeated row has no distinct pairs
                reps[b] = np.nan
                continue
            reps[b] = combine(_energy_from_weights(C, A, B, wx, wy))
        se = float(np.nanstd(reps, ddof=1))
    c, wx, wy = (float(spec.apply_h(t)) for t in parts)
    return EnergyEstimate(value, se, c, wx, wy)
