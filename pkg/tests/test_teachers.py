import numpy as np
import pytest
from PIL import Image

from dinoiser.denoiser import compute_affinity
from dinoiser.errors import InvalidArgumentError, NotFoundError
from dinoiser.teachers import (
    MaskDirectorySource,
    binarize_target,
    load_objectness_target,
    resample_mask_to_grid,
    teacher_features,
)
from dinoiser.types import PatchGrid

from conftest import random_feature_map


@pytest.fixture(scope="module")
def image():
    return (np.random.default_rng(6).random((56, 56, 3)) * 255).astype(np.uint8)


class TestTeacherFeatures:
    def test_default_kind_is_value(self, teacher_backbone, image):
        fmap = teacher_features(image, teacher_backbone)
        assert fmap.embedding_kind == "value"
        assert fmap.values.shape == (49, teacher_backbone.embed_dim)

    def test_key_and_value_affinities_differ(self, teacher_backbone, image):
        val = compute_affinity(teacher_features(image, teacher_backbone, "value"))
        key = compute_affinity(teacher_features(image, teacher_backbone, "key"))
        qry = compute_affinity(teacher_features(image, teacher_backbone, "query"))
        assert np.linalg.norm(val.values - key.values) > 0
        assert np.linalg.norm(val.values - qry.values) > 0

    def test_deterministic(self, teacher_backbone, image):
        a = teacher_features(image, teacher_backbone)
        b = teacher_features(image, teacher_backbone)
        assert np.array_equal(a.values, b.values)

    def test_affinity_invariants(self, teacher_backbone, image):
        a = compute_affinity(teacher_features(image, teacher_backbone)).values
        assert a.min() >= -1 - 1e-5 and a.max() <= 1 + 1e-5
        np.testing.assert_allclose(a, a.T, atol=1e-5)
        np.testing.assert_allclose(np.diagonal(a), 1.0, atol=1e-5)

    def test_unknown_kind(self, teacher_backbone, image):
        with pytest.raises(InvalidArgumentError):
            teacher_features(image, teacher_backbone, "cls")

    def test_grid_matches_student(self, backbone, teacher_backbone, image):
        from dinoiser.featurizer import encode_image_dense

        student = encode_image_dense(image, backbone)
        teacher = teacher_features(image, teacher_backbone)
        assert student.grid == teacher.grid


class TestBinarizeTarget:
    def test_diagonal_true_below_one(self, rng):
        affinity = compute_affinity(random_feature_map(rng))
        target = binarize_target(affinity, gamma=0.99)
        assert np.all(np.diagonal(target.values))

    def test_strictly_greater(self):
        from dinoiser.denoiser import TAG_TEACHER, AffinityMatrix

        grid = PatchGrid(n_rows=2, n_cols=1, patch_size=8)
        values = np.array([[1.0, 0.2], [0.2, 1.0]])
        affinity = AffinityMatrix(grid=grid, values=values, source_tag=TAG_TEACHER)
        target = binarize_target(affinity, gamma=0.2)
        assert not target.values[0, 1] and not target.values[1, 0]
        assert target.values[0, 0] and target.values[1, 1]

    def test_matches_elementwise_oracle(self, rng):
        affinity = compute_affinity(random_feature_map(rng, n_rows=5, n_cols=3, dim=6))
        gamma = 0.1
        target = binarize_target(affinity, gamma)
        for p in range(15):
            for q in range(15):
                assert target.values[p, q] == (affinity.values[p, q] > gamma)

    def test_symmetric(self, rng):
        affinity = compute_affinity(random_feature_map(rng, n_rows=4, n_cols=2, dim=5))
        target = binarize_target(affinity, gamma=0.3)
        np.testing.assert_array_equal(target.values, target.values.T)


class TestObjectnessTargets:
    def test_all_foreground(self, tmp_path):
        grid = PatchGrid(n_rows=4, n_cols=4, patch_size=8)
        Image.fromarray(np.full((32, 32), 255, dtype=np.uint8)).save(tmp_path / "img.png")
        omap = load_objectness_target("img", MaskDirectorySource(tmp_path), grid)
        assert omap.binary.all()

    def test_center_sampling_oracle(self, tmp_path):
        rng = np.random.default_rng(4)
        grid = PatchGrid(n_rows=28, n_cols=28, patch_size=16)
        mask = rng.random((448, 448)) < 0.5
        Image.fromarray(mask.astype(np.uint8) * 255).save(tmp_path / "m.png")
        omap = load_objectness_target("m", MaskDirectorySource(tmp_path), grid)
        # oracle: sample the pixel at each patch center
        expected = np.empty(grid.n, dtype=bool)
        for r in range(28):
            for c in range(28):
                cy = int(round((r + 0.5) * 448 / 28 - 0.5))
                cx = int(round((c + 0.5) * 448 / 28 - 0.5))
                expected[r * 28 + c] = mask[cy, cx]
        np.testing.assert_array_equal(omap.binary, expected)

    def test_resampling_idempotent(self, rng):
        grid = PatchGrid(n_rows=6, n_cols=5, patch_size=8)
        patch_mask = rng.random((6, 5)) < 0.5
        resampled = resample_mask_to_grid(patch_mask, grid)
        np.testing.assert_array_equal(resampled, patch_mask.reshape(-1))

    def test_aspect_mismatch_rejected(self, tmp_path):
        grid = PatchGrid(n_rows=28, n_cols=28, patch_size=16)
        Image.fromarray(np.zeros((448, 224), dtype=np.uint8)).save(tmp_path / "bad.png")
        with pytest.raises(InvalidArgumentError):
            load_objectness_target("bad", MaskDirectorySource(tmp_path), grid)

    def test_missing_mask(self, tmp_path):
        grid = PatchGrid(n_rows=2, n_cols=2, patch_size=8)
        with pytest.raises(NotFoundError):
            load_objectness_target("ghost", MaskDirectorySource(tmp_path), grid)

    def test_non_binary_mask_rejected(self, tmp_path):
        grid = PatchGrid(n_rows=2, n_cols=2, patch_size=8)
        Image.fromarray(np.full((16, 16), 128, dtype=np.uint8)).save(tmp_path / "grey.png")
        with pytest.raises(InvalidArgumentError):
            load_objectness_target("grey", MaskDirectorySource(tmp_path), grid)
