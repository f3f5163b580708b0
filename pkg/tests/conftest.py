"""Shared fixtures: tiny synthetic backbones and feature-map helpers."""

import numpy as np
import pytest

from dinoiser.featurizer import load_backbone, make_random_teacher, make_random_weights
from dinoiser.types import SOURCE_MASKCLIP, PatchFeatureMap, PatchGrid


@pytest.fixture(scope="session")
def backbone_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("weights") / "student.weights"
    make_random_weights(path, seed=7)
    return path


@pytest.fixture(scope="session")
def teacher_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("weights") / "teacher.weights"
    make_random_teacher(path, seed=11)
    return path


@pytest.fixture(scope="session")
def backbone(backbone_path):
    return load_backbone(backbone_path)


@pytest.fixture(scope="session")
def teacher_backbone(teacher_path):
    return load_backbone(teacher_path)


def random_feature_map(rng, n_rows=4, n_cols=4, dim=8, patch_size=8, tag=SOURCE_MASKCLIP):
    grid = PatchGrid(n_rows=n_rows, n_cols=n_cols, patch_size=patch_size)
    values = rng.normal(size=(grid.n, dim))
    return PatchFeatureMap(grid=grid, values=values, source_tag=tag)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def make_blob_image(rng, size=24):
    """Dim noisy background with one bright rectangle; mask marks the blob."""
    image = rng.uniform(0.0, 0.25, size=(size, size, 3))
    h = int(rng.integers(size // 3, size // 2 + 1))
    w = int(rng.integers(size // 3, size // 2 + 1))
    y = int(rng.integers(0, size - h + 1))
    x = int(rng.integers(0, size - w + 1))
    color = rng.uniform(0.7, 1.0, size=3)
    image[y : y + h, x : x + w] = color + rng.normal(0, 0.02, size=(h, w, 3))
    mask = np.zeros((size, size), dtype=bool)
    mask[y : y + h, x : x + w] = True
    return np.clip(image, 0, 1), mask


def make_synthetic_dataset(root, n_images=10, size=24, seed=100):
    """Blob images + objectness mask directory; returns (samples, mask_dir)."""
    from PIL import Image

    rng = np.random.default_rng(seed)
    mask_dir = root / "masks"
    mask_dir.mkdir(parents=True, exist_ok=True)
    samples = []
    for i in range(n_images):
        image, mask = make_blob_image(rng, size=size)
        samples.append((f"img{i:03d}", image))
        Image.fromarray(mask.astype(np.uint8) * 255).save(mask_dir / f"img{i:03d}.png")
    return samples, mask_dir
