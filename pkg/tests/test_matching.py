import numpy as np
import pytest

from dinoiser.denoiser import similarity_map
from dinoiser.errors import DegenerateInputError, InvalidArgumentError
from dinoiser.types import SOURCE_REFINED, PatchFeatureMap, PatchGrid, TextQuerySet

from conftest import random_feature_map


def make_queries(vectors, prompts=None):
    vectors = np.asarray(vectors, dtype=np.float64)
    vectors = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
    prompts = tuple(prompts or (f"q{i}" for i in range(vectors.shape[0])))
    return TextQuerySet(prompts=prompts, embeddings=vectors)


def matching_oracle(features, embeddings):
    """Brute-force cosine + argmax per patch."""
    scores = np.empty((features.shape[0], embeddings.shape[0]))
    for p, f in enumerate(features):
        for j, e in enumerate(embeddings):
            scores[p, j] = f @ e / (np.linalg.norm(f) * np.linalg.norm(e))
    return scores, scores.argmax(axis=1)


def test_aligned_query_scores_one(rng):
    direction = rng.normal(size=6)
    grid = PatchGrid(n_rows=1, n_cols=1, patch_size=8)
    fmap = PatchFeatureMap(grid=grid, values=direction[None, :] * 2.5,
                           source_tag=SOURCE_REFINED)
    queries = make_queries([direction, rng.normal(size=6)])
    result = similarity_map(fmap, queries)
    np.testing.assert_allclose(result.scores[0, 0], 1.0, atol=1e-12)
    assert result.labels[0] == 0


def test_scale_invariance(rng):
    fmap = random_feature_map(rng, dim=6, tag=SOURCE_REFINED)
    queries = make_queries(rng.normal(size=(4, 6)))
    base = similarity_map(fmap, queries)
    scaled = similarity_map(
        PatchFeatureMap(grid=fmap.grid, values=fmap.values * 3.0, source_tag=SOURCE_REFINED),
        queries,
    )
    np.testing.assert_allclose(base.scores, scaled.scores, atol=1e-12)
    np.testing.assert_array_equal(base.labels, scaled.labels)


def test_per_patch_positive_scaling_keeps_labels(rng):
    fmap = random_feature_map(rng, dim=6, tag=SOURCE_REFINED)
    queries = make_queries(rng.normal(size=(4, 6)))
    base = similarity_map(fmap, queries)
    scales = rng.uniform(0.01, 50.0, size=(fmap.grid.n, 1))
    rescaled = similarity_map(
        PatchFeatureMap(grid=fmap.grid, values=fmap.values * scales,
                        source_tag=SOURCE_REFINED),
        queries,
    )
    np.testing.assert_array_equal(base.labels, rescaled.labels)
    np.testing.assert_allclose(base.scores, rescaled.scores, atol=1e-10)


def test_matches_bruteforce_oracle(rng):
    grid = PatchGrid(n_rows=10, n_cols=1, patch_size=8)
    fmap = PatchFeatureMap(grid=grid, values=rng.normal(size=(10, 6)),
                           source_tag=SOURCE_REFINED)
    queries = make_queries(rng.normal(size=(4, 6)))
    result = similarity_map(fmap, queries)
    scores, labels = matching_oracle(fmap.values, queries.embeddings)
    np.testing.assert_allclose(result.scores, scores, atol=1e-10)
    np.testing.assert_array_equal(result.labels, labels)


def test_tie_breaks_to_lowest_index():
    grid = PatchGrid(n_rows=1, n_cols=1, patch_size=8)
    fmap = PatchFeatureMap(grid=grid, values=np.array([[1.0, 0.0]]),
                           source_tag=SOURCE_REFINED)
    queries = make_queries([[1.0, 0.0], [1.0, 0.0]])  # identical queries: exact tie
    assert similarity_map(fmap, queries).labels[0] == 0


def test_confidence_is_max_softmax(rng):
    fmap = random_feature_map(rng, dim=6, tag=SOURCE_REFINED)
    queries = make_queries(rng.normal(size=(5, 6)))
    result = similarity_map(fmap, queries)
    exp = np.exp(result.scores - result.scores.max(axis=1, keepdims=True))
    soft = exp / exp.sum(axis=1, keepdims=True)
    np.testing.assert_allclose(result.confidence, soft.max(axis=1), atol=1e-12)
    assert np.all(result.confidence > 0) and np.all(result.confidence <= 1)


def test_zero_norm_row_raises(rng):
    grid = PatchGrid(n_rows=2, n_cols=1, patch_size=8)
    values = np.array([[1.0, 2.0], [0.0, 0.0]])
    fmap = PatchFeatureMap(grid=grid, values=values, source_tag=SOURCE_REFINED)
    with pytest.raises(DegenerateInputError):
        similarity_map(fmap, make_queries(rng.normal(size=(2, 2))))


def test_dim_mismatch(rng):
    fmap = random_feature_map(rng, dim=6, tag=SOURCE_REFINED)
    with pytest.raises(InvalidArgumentError):
        similarity_map(fmap, make_queries(rng.normal(size=(2, 5))))
