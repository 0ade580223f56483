import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from hubridge.hubness import hubness_report, nk_counts, skewness
from hubridge.neighbors import DissimilarityMatrix, pairwise_euclidean, rank_all


class TestNkCounts:
    def test_full_top_covers_all(self):
        rankings = rank_all(DissimilarityMatrix([[0.3, 0.1, 0.2]]), "abc")
        np.testing.assert_array_equal(nk_counts(rankings, 3, "abc"), [1, 1, 1])

    def test_perfect_hub(self):
        vals = [[0.0, 1.0, 2.0], [0.1, 5.0, 3.0], [0.2, 0.9, 0.8]]
        rankings = rank_all(DissimilarityMatrix(vals), ["t1", "t2", "t3"])
        np.testing.assert_array_equal(nk_counts(rankings, 1, ["t1", "t2", "t3"]), [3, 0, 0])

    def test_overlapping_top_two(self):
        vals = [[0.1, 0.2, 0.9], [0.9, 0.1, 0.2]]
        rankings = rank_all(DissimilarityMatrix(vals), ["t1", "t2", "t3"])
        np.testing.assert_array_equal(nk_counts(rankings, 2, ["t1", "t2", "t3"]), [1, 2, 1])

    def test_errors(self):
        rankings = rank_all(DissimilarityMatrix([[0.3, 0.1]]), "ab")
        with pytest.raises(ValueError):
            nk_counts(rankings, 3, "ab")
        with pytest.raises(ValueError):
            nk_counts([], 1, "ab")

    def test_report_matches_rankings(self, backend, rng):
        d = pairwise_euclidean(rng.standard_normal((10, 40)), rng.standard_normal((10, 25)))
        ids = list(range(25))
        rankings = rank_all(d, ids)
        for k in (1, 5, 25):
            rep = hubness_report(d, k)
            np.testing.assert_array_equal(rep.counts, nk_counts(rankings, k, ids))
            assert rep.counts.sum() == k * 40
            assert rep.num_queries == 40

    def test_report_with_ties(self, backend):
        d = DissimilarityMatrix(np.ones((4, 5)))
        np.testing.assert_array_equal(hubness_report(d, 2).counts, [4, 4, 0, 0, 0])


class TestSkewness:
    def test_constant(self):
        assert skewness([2, 2, 2]) == 0.0
        assert skewness([7]) == 0.0

    def test_hand_value(self):
        assert skewness([0, 0, 3]) == pytest.approx(2 / 2**1.5, abs=1e-12)

    def test_symmetric(self):
        assert skewness([0, 1, 2, 3, 4]) == pytest.approx(0.0, abs=1e-15)
        assert skewness([0, 1, 2, 3, 4, 4, 3, 2, 1, 0]) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("ell", [3, 10, 100])
    @pytest.mark.parametrize("m", [1, 7])
    def test_single_hub(self, ell, m):
        counts = [m] + [0] * (ell - 1)
        assert skewness(counts) == pytest.approx((ell - 2) / math.sqrt(ell - 1), abs=1e-10)

    def test_empty(self):
        with pytest.raises(ValueError):
            skewness([])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(0, 50), min_size=2, max_size=40))
    def test_against_scipy(self, counts):
        if len(set(counts)) == 1:
            assert skewness(counts) == 0.0
        else:
            assert skewness(counts) == pytest.approx(stats.skew(counts, bias=True), rel=1e-9, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(0, 50), min_size=2, max_size=40), st.integers(1, 9), st.randoms())
    def test_scale_and_permutation_invariance(self, counts, c, random):
        base = skewness(counts)
        assert skewness([c * v for v in counts]) == pytest.approx(base, rel=1e-9, abs=1e-9)
        shuffled = list(counts)
        random.shuffle(shuffled)
        assert skewness(shuffled) == pytest.approx(base, rel=1e-9, abs=1e-9)
