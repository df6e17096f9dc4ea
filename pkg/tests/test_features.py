"""Texture feature vectors, Czekanowski similarity, retrieval, and kNN."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from subsurf.errors import DataError, GeometryError
from subsurf.features import (CzekanowskiKNN, FeatureConfig,
                              czekanowski_similarity, retrieve_similar,
                              texture_feature_vector)
from subsurf.synthetic import layered_patch, noise_patch


class TestFeatureVector:
    def test_nonnegative(self):
        vec = texture_feature_vector(layered_patch((32, 32), seed=0))
        assert np.all(vec >= 0.0)

    def test_length(self):
        cfg = FeatureConfig(n_scales=3, n_orientations=4, top_singular=3)
        vec = texture_feature_vector(noise_patch((32, 32)), cfg)
        assert len(vec) == (3 * 4 + 1) * 3  # subbands + low-pass residual

    def test_glcm_appended(self):
        cfg = FeatureConfig(include_glcm=True)
        base = FeatureConfig(include_glcm=False)
        patch = layered_patch((32, 32), seed=1)
        v1 = texture_feature_vector(patch, base)
        v2 = texture_feature_vector(patch, cfg)
        assert len(v2) == len(v1) + 4 * 4  # 4 features x 4 offsets
        assert np.all(v2 >= 0.0)

    def test_deterministic(self):
        patch = noise_patch((32, 32), seed=2)
        v1 = texture_feature_vector(patch)
        v2 = texture_feature_vector(patch.copy())
        np.testing.assert_array_equal(v1, v2)

    def test_rejects_small_or_non_square(self):
        with pytest.raises(GeometryError):
            texture_feature_vector(np.zeros((16, 16)))
        with pytest.raises(GeometryError):
            texture_feature_vector(np.zeros((32, 40)))

    def test_layered_vs_noise_separation(self):
        layered_a = texture_feature_vector(layered_patch((32, 32), seed=3))
        layered_b = texture_feature_vector(layered_patch((32, 32), seed=4,
                                                         phase=0.9))
        noisy = texture_feature_vector(noise_patch((32, 32), seed=5))
        same = czekanowski_similarity(layered_a, layered_b)
        cross = czekanowski_similarity(layered_a, noisy)
        assert same > 0.8
        assert cross < 0.8


class TestCzekanowski:
    def test_disjoint_support_zero(self):
        assert czekanowski_similarity(np.array([1.0, 0.0]),
                                      np.array([0.0, 1.0])) == 0.0

    def test_partial_overlap_two_thirds(self):
        got = czekanowski_similarity(np.array([1.0, 1.0]),
                                     np.array([1.0, 3.0]))
        assert got == pytest.approx(2 / 3, abs=1e-15)

    def test_identical_is_one(self):
        v = np.array([0.5, 2.0, 0.0, 7.0])
        assert czekanowski_similarity(v, v.copy()) == 1.0

    def test_both_zero_convention(self):
        z = np.zeros(4)
        assert czekanowski_similarity(z, z) == 1.0

    def test_symmetric(self):
        rng = np.random.default_rng(0)
        a, b = rng.random((2, 6))
        assert czekanowski_similarity(a, b) == czekanowski_similarity(b, a)

    @settings(max_examples=100, deadline=None)
    @given(arrays(np.float64, 5, elements=st.floats(0, 100)),
           arrays(np.float64, 5, elements=st.floats(0, 100)))
    def test_range_property(self, a, b):
        assert 0.0 <= czekanowski_similarity(a, b) <= 1.0

    def test_rejects_negative(self):
        with pytest.raises(DataError):
            czekanowski_similarity(np.array([-1.0, 2.0]), np.array([1.0, 2.0]))

    def test_shape_mismatch(self):
        with pytest.raises(GeometryError):
            czekanowski_similarity(np.zeros(3), np.zeros(4))


class TestRetrieval:
    def test_orders_by_similarity(self):
        exemplar = np.array([1.0, 0.0, 0.0])
        corpus = [np.array([0.0, 1.0, 0.0]),  # sim 0
                  np.array([1.0, 0.0, 0.0]),  # sim 1
                  np.array([1.0, 1.0, 0.0])]  # sim 2/3
        out = retrieve_similar(exemplar, corpus, 3)
        assert [i for i, _ in out] == [1, 2, 0]

    def test_ties_break_to_lower_index(self):
        exemplar = np.array([1.0, 1.0])
        corpus = [exemplar.copy(), exemplar.copy(), np.array([5.0, 0.0])]
        out = retrieve_similar(exemplar, corpus, 2)
        assert [i for i, _ in out] == [0, 1]

    def test_k_validated(self):
        with pytest.raises(GeometryError):
            retrieve_similar(np.ones(2), [np.ones(2)], 2)
        with pytest.raises(DataError):
            retrieve_similar(np.ones(2), [], 1)


class TestKnn:
    def test_majority_vote(self):
        feats = [np.array([1.0, 0.0]), np.array([0.9, 0.1]),
                 np.array([0.8, 0.2]), np.array([0.0, 1.0]),
                 np.array([0.1, 0.9])]
        labels = [0, 0, 0, 1, 1]
        knn = CzekanowskiKNN(k=3).fit(feats, labels)
        assert knn.predict(np.array([0.95, 0.05])) == 0
        assert knn.predict(np.array([0.05, 0.95])) == 1

    def test_tie_goes_to_most_similar(self):
        feats = [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
        labels = [0, 1]
        knn = CzekanowskiKNN(k=2).fit(feats, labels)
        assert knn.predict(np.array([0.9, 0.1])) == 0

    def test_untrained_raises(self):
        with pytest.raises(DataError):
            CzekanowskiKNN().predict(np.ones(2))

    def test_empty_fit_rejected(self):
        with pytest.raises(DataError):
            CzekanowskiKNN().fit([], [])
