import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from balldiv.core import (
    KIND_NAMES,
    DistanceKind,
    DistanceSpec,
    PooledSample,
    as_data_matrix,
    check_labeling,
    distance,
    labeling_from_permutation,
    pairwise_distances,
    rowwise_distances,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def vectors(d):
    return arrays(np.float64, d, elements=finite)


class TestBuiltinDistances:
    def test_l2_example(self):
        assert distance([0, 0], [3, 4], DistanceSpec.from_name("l2")) == pytest.approx(math.sqrt(12.5), abs=1e-12)

    def test_log_example(self):
        d = distance([0.0], [math.sqrt(math.e - 1)], DistanceSpec.from_name("log"))
        assert d == pytest.approx(1.0, abs=1e-14)

    def test_l1_is_mean_absolute_gap(self):
        assert distance([0, 0], [3, -4], DistanceSpec.from_name("l1")) == pytest.approx(3.5, abs=1e-14)

    def test_exp_formula(self):
        want = np.mean(1 - np.exp(-np.array([9.0, 16.0]) / 2))
        assert distance([0, 0], [3, 4], DistanceSpec.from_name("exp")) == pytest.approx(want, rel=1e-14)

    def test_exp_small_gap_keeps_precision(self):
        # 1 - exp(-t/2) loses everything at t = 1e-20; expm1 keeps t/2
        got = distance([0.0], [1e-10], DistanceSpec.from_name("exp"))
        assert got == pytest.approx(0.5e-20, rel=1e-12)

    def test_identical_points_give_zero(self, spec):
        a = np.array([1.5, -2.0, 7.25])
        assert distance(a, a.copy(), spec) == 0.0

    def test_kind_names(self):
        assert KIND_NAMES == ("l2", "l1", "exp", "log")
        assert DistanceSpec.from_name("EXP").kind == DistanceKind.EXP


class TestDistanceErrors:
    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            distance([0, 0], [0, 0, 0], DistanceSpec.from_name("l2"))

    @pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
    def test_non_finite(self, bad):
        with pytest.raises(ValueError, match="non-finite"):
            distance([0, bad], [0, 0], DistanceSpec.from_name("l1"))

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown distance kind"):
            DistanceSpec.from_name("cosine")

    def test_custom_requires_zero_at_origin(self):
        with pytest.raises(ValueError, match="psi"):
            DistanceSpec.custom(lambda t: t, lambda t: t + 1)


class TestDistanceProperties:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 6).flatmap(lambda d: st.tuples(vectors(d), vectors(d))), st.sampled_from(KIND_NAMES))
    def test_symmetric_nonnegative(self, ab, kind):
        a, b = ab
        s = DistanceSpec.from_name(kind)
        assert distance(a, b, s) == distance(b, a, s)
        assert distance(a, b, s) >= 0.0

    @settings(max_examples=60, deadline=None)
    @given(vectors(4), vectors(4), st.integers(0, 3), st.floats(0, 50), st.sampled_from(KIND_NAMES))
    def test_monotone_in_one_gap(self, a, b, q, extra, kind):
        s = DistanceSpec.from_name(kind)
        farther = b.copy()
        farther[q] = b[q] + math.copysign(extra, b[q] - a[q] if b[q] != a[q] else 1.0)
        assert distance(a, farther, s) >= distance(a, b, s) * (1 - 1e-15)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 8).flatmap(lambda d: st.tuples(vectors(d), vectors(d))))
    def test_l1_matches_mean_absolute(self, ab):
        a, b = ab
        want = np.mean(np.abs(a - b))
        assert distance(a, b, DistanceSpec.from_name("l1")) == pytest.approx(want, rel=1e-13, abs=1e-300)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 8).flatmap(lambda d: st.tuples(vectors(d), vectors(d))))
    def test_exp_bounded_by_one(self, ab):
        a, b = ab
        assert distance(a, b, DistanceSpec.from_name("exp")) <= 1.0


class TestCustomSpec:
    def test_custom_matches_builtin(self, rng):
        u = rng.standard_normal((7, 3))
        custom = DistanceSpec.custom(np.sqrt, lambda t: t, label="my-l2")
        np.testing.assert_allclose(
            pairwise_distances(u, custom), pairwise_distances(u, DistanceSpec.from_name("l2")), rtol=1e-13, atol=0
        )
        assert custom.name == "my-l2"

    def test_custom_rowwise(self, rng):
        a, b = rng.standard_normal((5, 2)), rng.standard_normal((5, 2))
        custom = DistanceSpec.custom(lambda t: t, np.log1p)
        np.testing.assert_allclose(
            rowwise_distances(a, b, custom), rowwise_distances(a, b, DistanceSpec.from_name("log")), rtol=1e-13
        )


class TestPairwise:
    def test_symmetric_zero_diagonal(self, rng, spec):
        D = pairwise_distances(rng.standard_normal((9, 4)), spec)
        assert np.array_equal(D, D.T)
        assert np.all(np.diag(D) == 0.0)

    def test_matches_scalar_distance(self, rng, spec):
        u = rng.standard_normal((6, 3))
        D = pairwise_distances(u, spec)
        for i in range(6):
            for j in range(6):
                assert D[i, j] == pytest.approx(distance(u[i], u[j], spec), rel=1e-15, abs=0)


class TestSamples:
    def test_data_matrix_read_only(self):
        a = as_data_matrix([[1, 2], [3, 4]])
        assert not a.flags.writeable
        assert a.shape == (2, 2)

    def test_data_matrix_reports_position(self):
        with pytest.raises(ValueError, match="row 1, column 0"):
            as_data_matrix([[1.0, 2.0], [np.nan, 1.0]])

    def test_pooled_sizes(self, rng):
        p = PooledSample(rng.standard_normal((3, 2)), rng.standard_normal((4, 2)))
        assert (p.n, p.m, p.N, p.dim) == (3, 4, 7, 2)
        assert p.identity_labels().tolist() == [0, 0, 0, 1, 1, 1, 1]

    def test_pooled_needs_three_each(self, rng):
        with pytest.raises(ValueError):
            PooledSample(rng.standard_normal((2, 2)), rng.standard_normal((4, 2)))

    def test_pooled_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            PooledSample(rng.standard_normal((3, 2)), rng.standard_normal((3, 3)))


class TestLabeling:
    def test_identity(self):
        assert labeling_from_permutation(range(6), 3).tolist() == [0, 0, 0, 1, 1, 1]

    def test_reversed(self):
        assert labeling_from_permutation([5, 4, 3, 2, 1, 0], 3).tolist() == [1, 1, 1, 0, 0, 0]

    def test_explicit(self):
        assert labeling_from_permutation([2, 4, 0, 1, 3], 2).tolist() == [1, 1, 0, 1, 0]

    @pytest.mark.parametrize("perm, n", [([0, 0, 1, 2], 2), ([0, 1, 2, 7], 2), ([0, 1, 2], 3), ([0, 1, 2], 0)])
    def test_invalid_permutation(self, perm, n):
        with pytest.raises(ValueError):
            labeling_from_permutation(perm, n)

    def test_check_labeling_counts(self):
        with pytest.raises(ValueError):
            check_labeling([0, 0, 1, 1, 1, 1], 3, 3)
