"""Permutation inference for the ball statistic.

Random mode relabels the pool with B seeded Fisher-Yates shuffles; replicate
k draws from the SplitMix64 substream ``substream_key(seed, k)`` so results
do not depend on how replicates are scheduled across threads. Exhaustive
mode enumerates every n-subset in lexicographic order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _kernels
from .core import DistanceSpec, PooledSample
from .statistic import BallIndex, StatisticValue, ball_statistic_fast, build_index

DEFAULT_B = 500
DEFAULT_MAX_COMBINATIONS = 100_000
_U64 = 1 << 64


@dataclass(frozen=True)
class RandomPlan:
    B: int = DEFAULT_B
    seed: int = 0

    def __post_init__(self):
        if self.B < 1:
            raise ValueError(f"B must be >= 1, got {self.B}")
        if not 0 <= self.seed < _U64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class ExhaustivePlan:
    max_combinations: int = DEFAULT_MAX_COMBINATIONS


PermutationPlan = Union[RandomPlan, ExhaustivePlan]


@dataclass(frozen=True, eq=False)
class TestResult:
    observed: StatisticValue
    replicates: np.ndarray
    p_value: float
    alpha: float
    reject: bool
    cutoff_estimate: float
    seed: Optional[int]
    B: int
    exhaustive: bool

    __test__ = False  # keep pytest from collecting this class

    def to_dict(self) -> dict:
        return {
            "statistic": self.observed.t,
            "v1": self.observed.v1,
            "v2": self.observed.v2,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "reject": self.reject,
            "cutoff_estimate": self.cutoff_estimate,
            "seed": self.seed,
            "B": self.B,
            "exhaustive": self.exhaustive,
        }


def cutoff_upper_bound(alpha: float, n: int, m: int) -> float:
    """Data-free upper bound 2 / (3 alpha (min(n, m) - 2)) on the permutation cut-off."""
    _check_alpha(alpha)
    k = min(n, m)
    if k <= 2:
        raise ValueError(f"min(n, m) must exceed 2, got {k}")
    return 2.0 / (3.0 * alpha * (k - 2))


def perm_conditional_expectation(n: int, m: int) -> float:
    """Mean of the statistic over uniformly random relabelings of a tie-free pool."""
    if n < 3 or m < 3:
        raise ValueError(f"need n, m >= 3 (got n={n}, m={m})")
    return (1.0 / n + 1.0 / m + 1.0 / (n - 2) + 1.0 / (m - 2)) / 6.0


def empirical_quantile(values: np.ndarray, level: float) -> float:
    """Smallest value t with empirical CDF(t) >= level."""
    s = np.sort(np.asarray(values, dtype=float))
    k = max(1, math.ceil(round(level * s.size, 9)))
    return float(s[k - 1])


def exhaustive_labelings(n: int, m: int, max_combinations: int = DEFAULT_MAX_COMBINATIONS) -> np.ndarray:
    """All C(n+m, n) labelings, the zero-positions in lexicographic order."""
    N = n + m
    total = math.comb(N, n)
    if total > max_combinations:
        raise ValueError(
            f"exhaustive enumeration needs C({N},{n}) = {total} labelings, cap is {max_combinations}"
        )
    out = np.ones((total, N), dtype=np.int8)
    for row, zeros in enumerate(itertools.combinations(range(N), n)):
        out[row, list(zeros)] = 0
    return out


def random_labelings(n: int, m: int, B: int, seed: int) -> np.ndarray:
    """The B labelings used by random mode, materialised (for inspection/tests)."""
    return np.stack([_kernels.replicate_labeling(n, m, np.uint64(seed), b) for b in range(B)])


def replicate_statistics(index: BallIndex, plan: PermutationPlan) -> np.ndarray:
    if isinstance(plan, RandomPlan):
        return _kernels.random_replicates(
            index.order, index.tie_rank, index.n, index.m, np.uint64(plan.seed), plan.B
        )
    labelings = exhaustive_labelings(index.n, index.m, plan.max_combinations)
    return _kernels.statistics_for_labelings(index.order, index.tie_rank, labelings, index.n, index.m)


def index_test(index: BallIndex, plan: PermutationPlan, alpha: float = 0.05) -> TestResult:
    """Permutation test on an already built index (observed labeling = first n rows)."""
    _check_alpha(alpha)
    labels = np.zeros(index.N, dtype=np.int8)
    labels[index.n:] = 1
    observed = ball_statistic_fast(index, labels)
    reps = replicate_statistics(index, plan)
    count = int(np.count_nonzero(reps >= observed.t))
    if isinstance(plan, RandomPlan):
        p = (1 + count) / (plan.B + 1)
        seed, B, exhaustive = plan.seed, plan.B, False
    else:
        p = count / reps.size
        seed, B, exhaustive = None, int(reps.size), True
    reps.setflags(write=False)
    return TestResult(
        observed=observed,
        replicates=reps,
        p_value=p,
        alpha=alpha,
        reject=p < alpha,
        cutoff_estimate=empirical_quantile(reps, 1.0 - alpha),
        seed=seed,
        B=B,
        exhaustive=exhaustive,
    )


def permutation_test(
    pooled: PooledSample,
    spec: DistanceSpec | str = "l2",
    plan: Optional[PermutationPlan] = None,
    alpha: float = 0.05,
) -> TestResult:
    """Ball-divergence permutation test of F == G for ``pooled.x`` vs ``pooled.y``.

    Parameters
    ----------
    pooled : PooledSample
    spec : DistanceSpec or name ("l2", "l1", "exp", "log")
    plan : RandomPlan or ExhaustivePlan, default RandomPlan(B=500, seed=0)
    alpha : float
        Nominal level; the test rejects when the p-value is below it.
    """
    if isinstance(spec, str):
        spec = DistanceSpec.from_name(spec)
    if plan is None:
        plan = RandomPlan()
    _check_alpha(alpha)
    if isinstance(plan, ExhaustivePlan):
        # fail before paying for the index
        total = math.comb(pooled.N, pooled.n)
        if total > plan.max_combinations:
            raise ValueError(
                f"exhaustive enumeration needs {total} labelings, cap is {plan.max_combinations}"
            )
    return index_test(build_index(pooled, spec), plan, alpha)


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
