from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from balldiv.core import KIND_NAMES, DistanceSpec, PooledSample, pairwise_distances
from balldiv.statistic import (
    ball_statistic,
    ball_statistic_fast,
    ball_statistic_naive,
    build_index,
    index_from_distances,
)

from conftest import random_pooled

L2 = DistanceSpec.from_name("l2")


def exact_statistic(x, y):
    """Exact rational value of the statistic for 1-D samples, straight from the double sums."""

    def term(a, b):
        total = Fraction(0)
        for i in range(len(a)):
            for j in range(len(a)):
                if i == j:
                    continue
                r = abs(a[j] - a[i])
                same = sum(1 for k in range(len(a)) if k not in (i, j) and abs(a[k] - a[i]) <= r)
                opp = sum(1 for v in b if abs(v - a[i]) <= r)
                total += (Fraction(same, len(a) - 2) - Fraction(opp, len(b))) ** 2
        return total / (len(a) * (len(a) - 1))

    return term(x, y), term(y, x)


def labels_for(n, m):
    lab = np.zeros(n + m, dtype=np.int8)
    lab[n:] = 1
    return lab


class TestBallIndex:
    def test_order_sorted_by_distance(self):
        pooled = PooledSample([[0.0], [1.0], [3.0]], [[10.0], [11.0], [13.0]])
        idx = build_index(pooled, L2)
        assert idx.order[0, :2].tolist() == [1, 2]

    def test_duplicates_share_tie_rank(self):
        pooled = PooledSample([[0.0], [2.0], [2.0]], [[5.0], [7.0], [-2.0]])
        idx = build_index(pooled, L2)
        # points 1, 2 and 5 are all at distance 2 from point 0
        assert idx.tie_rank[0, 1] == idx.tie_rank[0, 2] == idx.tie_rank[0, 5] == 3

    def test_farthest_point_has_full_rank(self, rng, spec):
        idx = build_index(random_pooled(rng, 4, 5, 3, duplicates=True), spec)
        N = idx.N
        for i in range(N):
            assert idx.tie_rank[i, idx.order[i, -1]] == N - 1

    def test_invariants(self, rng, spec):
        idx = build_index(random_pooled(rng, 5, 4, 2, duplicates=True), spec)
        N = idx.N
        for i in range(N):
            o = idx.order[i]
            assert sorted(o.tolist()) == [u for u in range(N) if u != i]
            assert np.all(np.diff(idx.dist[i, o]) >= 0)
            for j in range(N):
                if j != i:
                    want = np.count_nonzero(idx.dist[i, o] <= idx.dist[i, j])
                    assert idx.tie_rank[i, j] == want
                    assert 1 <= idx.tie_rank[i, j] <= N - 1

    def test_arrays_read_only(self, rng):
        idx = build_index(random_pooled(rng, 3, 3, 1), L2)
        assert not idx.order.flags.writeable and not idx.tie_rank.flags.writeable

    def test_rejects_asymmetric(self):
        D = np.ones((6, 6)) - np.eye(6)
        D[0, 1] = 2.0
        with pytest.raises(ValueError, match="symmetric"):
            index_from_distances(D, 3, 3)

    def test_rejects_overflowed_distances(self):
        pooled = PooledSample([[0.0], [1.0], [2.0]], [[1e200], [3.0], [4.0]])
        with pytest.raises(ValueError, match="non-finite"):
            build_index(pooled, L2)


class TestClosedFormValues:
    def test_tie_free_separated_groups(self):
        # every within-group ball misses the other group
        v = ball_statistic([0.0, 1.0, 3.0], [100.0, 101.0, 103.0])
        assert v.v1 == pytest.approx(0.5, abs=1e-15)
        assert v.v2 == pytest.approx(0.5, abs=1e-15)
        assert v.t == pytest.approx(1.0, abs=1e-15)

    def test_equally_spaced_groups_include_ties(self):
        # 0, 1, 2: points 0 and 2 are equidistant from 1, so boundary ties count
        x, y = [0.0, 1.0, 2.0], [100.0, 101.0, 102.0]
        v1, v2 = exact_statistic(x, y)
        assert (v1, v2) == (Fraction(2, 3), Fraction(2, 3))
        got = ball_statistic(x, y)
        assert got.t == pytest.approx(4 / 3, abs=1e-15)

    def test_small_example_against_exact(self):
        x, y = [0.0, 2.0, 5.0], [1.0, 8.0, 9.0]
        v1, v2 = exact_statistic(x, y)
        assert v1 + v2 == Fraction(11, 27)
        got = ball_statistic(x, y)
        assert got.v1 == pytest.approx(float(v1), abs=1e-15)
        assert got.v2 == pytest.approx(float(v2), abs=1e-15)

    def test_all_identical_points(self):
        pooled = PooledSample(np.zeros((3, 2)), np.zeros((4, 2)))
        idx = build_index(pooled, L2)
        lab = labels_for(3, 4)
        fast, naive = ball_statistic_fast(idx, lab), ball_statistic_naive(idx, lab)
        # every point is in every ball: (1 - 1)^2 for X-centres, (1 - 1)^2 for Y-centres
        assert fast.t == naive.t == 0.0

    def test_exhaustive_mean_n3_m3(self, rng):
        idx = build_index(random_pooled(rng, 3, 3, 2), L2)
        vals = []
        for zeros in combinations(range(6), 3):
            lab = np.ones(6, dtype=np.int8)
            lab[list(zeros)] = 0
            vals.append(ball_statistic_fast(idx, lab).t)
        assert len(vals) == 20
        assert np.mean(vals) == pytest.approx(4 / 9, abs=1e-12)


class TestFastMatchesNaive:
    @pytest.mark.parametrize("n, m", [(3, 3), (3, 5), (6, 4), (8, 8)])
    @pytest.mark.parametrize("duplicates", [False, True])
    def test_random_labelings(self, rng, spec, n, m, duplicates):
        idx = build_index(random_pooled(rng, n, m, 3, duplicates), spec)
        for _ in range(5):
            lab = rng.permutation(labels_for(n, m))
            f, s = ball_statistic_fast(idx, lab), ball_statistic_naive(idx, lab)
            assert abs(f.v1 - s.v1) <= 1e-12 and abs(f.v2 - s.v2) <= 1e-12

    @settings(max_examples=40, deadline=None)
    @given(
        st.integers(3, 6),
        st.integers(3, 6),
        st.lists(st.integers(-3, 3), min_size=12, max_size=12),
        st.sampled_from(KIND_NAMES),
    )
    def test_integer_grids_with_many_ties(self, n, m, coords, kind):
        pts = np.array(coords[: n + m], dtype=float)[:, None]
        idx = build_index(PooledSample(pts[:n], pts[n:]), DistanceSpec.from_name(kind))
        lab = labels_for(n, m)
        f, s = ball_statistic_fast(idx, lab), ball_statistic_naive(idx, lab)
        assert abs(f.t - s.t) <= 1e-12


class TestProperties:
    def test_range(self, rng, spec):
        idx = build_index(random_pooled(rng, 5, 6, 2, duplicates=True), spec)
        for _ in range(20):
            v = ball_statistic_fast(idx, rng.permutation(labels_for(5, 6)))
            assert 0.0 <= v.v1 <= 1.0 and 0.0 <= v.v2 <= 1.0

    def test_label_swap_symmetry(self, rng, spec):
        idx = build_index(random_pooled(rng, 5, 5, 3), spec)
        for _ in range(10):
            lab = rng.permutation(labels_for(5, 5))
            assert ball_statistic_fast(idx, lab).t == ball_statistic_fast(idx, 1 - lab).t

    @pytest.mark.parametrize("transform", [np.sqrt, np.log1p, lambda t: t**3 + 2 * t])
    def test_monotone_transform_invariance(self, rng, transform):
        pooled = random_pooled(rng, 4, 6, 3)
        D = pairwise_distances(pooled.pooled(), L2)
        a = index_from_distances(D, 4, 6)
        b = index_from_distances(transform(D), 4, 6)
        lab = rng.permutation(labels_for(4, 6))
        assert ball_statistic_fast(a, lab).t == ball_statistic_fast(b, lab).t

    def test_row_order_within_group_irrelevant(self, rng, spec):
        pooled = random_pooled(rng, 5, 4, 2)
        shuffled = PooledSample(pooled.x[rng.permutation(5)], pooled.y[rng.permutation(4)])
        a = ball_statistic_fast(build_index(pooled, spec), pooled.identity_labels()).t
        b = ball_statistic_fast(build_index(shuffled, spec), shuffled.identity_labels()).t
        assert a == pytest.approx(b, abs=1e-14)

    def test_label_count_mismatch(self, rng):
        idx = build_index(random_pooled(rng, 3, 4, 1), L2)
        with pytest.raises(ValueError):
            ball_statistic_fast(idx, labels_for(4, 3))
        with pytest.raises(ValueError):
            ball_statistic_naive(idx, labels_for(4, 3))
