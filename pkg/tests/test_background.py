import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dinoiser.denoiser import ObjectnessMap, refine_background, result_from_scores
from dinoiser.errors import InvalidArgumentError
from dinoiser.types import PatchGrid


def random_instance(rng, n_rows=4, n_cols=4, n_queries=5):
    grid = PatchGrid(n_rows=n_rows, n_cols=n_cols, patch_size=8)
    scores = rng.uniform(-1, 1, size=(grid.n, n_queries))
    result = result_from_scores(grid, scores)
    objectness = ObjectnessMap.from_binary(grid, rng.random(grid.n) < 0.5)
    return result, objectness


def test_delta_zero_changes_nothing(rng):
    result, objectness = random_instance(rng)
    refined = refine_background(result, objectness, delta=0.0, background_index=0)
    np.testing.assert_array_equal(refined.labels, result.labels)


def test_conjunction_foreground_patch_unchanged():
    grid = PatchGrid(n_rows=1, n_cols=1, patch_size=8)
    result = result_from_scores(grid, np.array([[0.3, 0.3]]))  # confidence 0.5
    fg = ObjectnessMap.from_binary(grid, np.array([True]))
    refined = refine_background(result, fg, delta=0.9, background_index=1)
    assert refined.labels[0] == result.labels[0]
    bg = ObjectnessMap.from_binary(grid, np.array([False]))
    refined = refine_background(result, bg, delta=0.9, background_index=1)
    assert refined.labels[0] == 1


def test_scores_and_confidence_untouched(rng):
    result, objectness = random_instance(rng)
    refined = refine_background(result, objectness, delta=1.0, background_index=2)
    np.testing.assert_array_equal(refined.scores, result.scores)
    np.testing.assert_array_equal(refined.confidence, result.confidence)


def test_delta_one_gates_purely_on_objectness(rng):
    # softmax confidence of finite scores is always < 1, so delta=1 reassigns
    # exactly the background patches: the saliency-mask-alone behavior
    result, objectness = random_instance(rng)
    refined = refine_background(result, objectness, delta=1.0, background_index=0)
    expected = result.labels.copy()
    expected[~objectness.binary] = 0
    np.testing.assert_array_equal(refined.labels, expected)


def test_reassignment_monotone_in_delta():
    rng = np.random.default_rng(1)
    for _ in range(100):
        result, objectness = random_instance(rng, n_rows=3, n_cols=3, n_queries=4)
        deltas = sorted(rng.uniform(0, 1, size=3))
        previous = None
        for delta in deltas:
            refined = refine_background(result, objectness, delta, background_index=0)
            changed = set(np.flatnonzero(refined.labels != result.labels))
            if previous is not None:
                assert previous <= changed
            previous = changed
        # confident patches are never touched
        refined = refine_background(result, objectness, deltas[-1], background_index=0)
        touched = refined.labels != result.labels
        assert np.all(result.confidence[touched] < deltas[-1])
        assert not np.any(touched & objectness.binary)


@settings(max_examples=50)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1),
       delta=st.floats(min_value=0.0, max_value=1.0))
def test_gate_properties(seed, delta):
    rng = np.random.default_rng(seed)
    result, objectness = random_instance(rng, n_rows=2, n_cols=3, n_queries=3)
    refined = refine_background(result, objectness, delta, background_index=1)
    changed = refined.labels != result.labels
    assert not np.any(changed & (result.confidence >= delta))
    assert not np.any(changed & objectness.binary)
    assert np.all(refined.labels[changed] == 1)


def test_bad_background_index(rng):
    result, objectness = random_instance(rng, n_queries=3)
    with pytest.raises(InvalidArgumentError):
        refine_background(result, objectness, delta=0.5, background_index=3)


def test_bad_delta(rng):
    result, objectness = random_instance(rng)
    with pytest.raises(InvalidArgumentError):
        refine_background(result, objectness, delta=1.5, background_index=0)


def test_grid_mismatch(rng):
    result, _ = random_instance(rng, n_rows=2, n_cols=2)
    other = ObjectnessMap.from_binary(PatchGrid(n_rows=3, n_cols=3, patch_size=8),
                                      np.zeros(9, dtype=bool))
    with pytest.raises(InvalidArgumentError):
        refine_background(result, other, delta=0.5, background_index=0)
