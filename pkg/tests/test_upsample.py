import numpy as np
import pytest

from dinoiser.denoiser import (
    ObjectnessMap,
    refine_background,
    result_from_scores,
    upsample_to_pixels,
)
from dinoiser.errors import InvalidArgumentError
from dinoiser.types import PatchGrid


def test_single_patch_grid_gives_constant_map():
    grid = PatchGrid(n_rows=1, n_cols=1, patch_size=8)
    result = result_from_scores(grid, np.array([[0.2, 0.8]]))
    labels = upsample_to_pixels(result, 33, 47)
    assert labels.shape == (33, 47)
    assert np.all(labels == 1)


def test_upsample_to_grid_size_is_identity(rng):
    grid = PatchGrid(n_rows=4, n_cols=6, patch_size=8)
    result = result_from_scores(grid, rng.uniform(-1, 1, size=(grid.n, 3)))
    labels = upsample_to_pixels(result, 4, 6)
    np.testing.assert_array_equal(labels.reshape(-1), result.labels)


def test_two_region_boundary_within_one_patch():
    # monotone two-region score map: left half prefers query 0, right half query 1
    grid = PatchGrid(n_rows=4, n_cols=8, patch_size=16)
    scores = np.zeros((grid.n, 2))
    for r in range(4):
        for c in range(8):
            scores[r * 8 + c] = (0.9, -0.9) if c < 4 else (-0.9, 0.9)
    result = result_from_scores(grid, scores)
    labels = upsample_to_pixels(result, 64, 128)
    patch_boundary_px = 4 * 16  # boundary between patch cols 3 and 4
    for row in labels:
        flips = np.flatnonzero(np.diff(row))
        assert len(flips) == 1
        assert abs((flips[0] + 1) - patch_boundary_px) <= 16


def test_background_override_at_patch_granularity(rng):
    grid = PatchGrid(n_rows=2, n_cols=2, patch_size=8)
    scores = np.array([[0.9, -0.9], [0.8, -0.8], [-0.7, 0.7], [0.6, -0.6]])
    result = result_from_scores(grid, scores)
    objectness = ObjectnessMap.from_binary(grid, np.array([True, False, True, True]))
    refined = refine_background(result, objectness, delta=1.0, background_index=1)
    assert refined.labels[1] == 1  # reassigned patch
    labels = upsample_to_pixels(refined, 16, 16)
    # nearest-expanded cell of the reassigned patch is solidly background
    assert np.all(labels[:8, 8:] == 1)
    # a confident foreground patch far from the override keeps its label
    assert labels[0, 0] == 0


def test_target_smaller_than_grid_rejected(rng):
    grid = PatchGrid(n_rows=4, n_cols=4, patch_size=8)
    result = result_from_scores(grid, rng.uniform(-1, 1, size=(grid.n, 2)))
    with pytest.raises(InvalidArgumentError):
        upsample_to_pixels(result, 2, 16)
