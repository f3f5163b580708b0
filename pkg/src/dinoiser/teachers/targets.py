"""Training targets: binarized teacher affinities and objectness masks."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from ..denoiser.affinity import AffinityMatrix
from ..denoiser.heads import ObjectnessMap
from ..errors import InvalidArgumentError, NotFoundError
from ..types import PatchGrid

# Tolerated mismatch between mask and grid aspect ratios; the grid's
# ceil-rounding can shift aspect by up to one patch per axis.
_ASPECT_TOL = 0.2


@dataclass(frozen=True)
class BinaryAffinityTarget:
    """Boolean N x N target: which patch pairs count as correlated."""

    grid: PatchGrid
    values: np.ndarray

    def __post_init__(self):
        n = self.grid.n
        if self.values.shape != (n, n) or self.values.dtype != np.bool_:
            raise InvalidArgumentError(
                f"target must be boolean ({n}, {n}), got {self.values.dtype} {self.values.shape}"
            )


def binarize_target(affinity: AffinityMatrix, gamma: float) -> BinaryAffinityTarget:
    """Strict elementwise comparison: an entry exactly at ``gamma`` is False."""
    return BinaryAffinityTarget(grid=affinity.grid, values=affinity.values > gamma)


def resample_mask_to_grid(mask: np.ndarray, grid: PatchGrid) -> np.ndarray:
    """Nearest-neighbor sample of a pixel mask at patch centers."""
    h, w = mask.shape
    scale_y, scale_x = h / grid.n_rows, w / grid.n_cols
    if abs(math.log(scale_y / scale_x)) > _ASPECT_TOL:
        raise InvalidArgumentError(
            f"mask {h}x{w} aspect does not match grid {grid.n_rows}x{grid.n_cols}"
        )
    ys = np.clip(np.rint((np.arange(grid.n_rows) + 0.5) * scale_y - 0.5), 0, h - 1).astype(int)
    xs = np.clip(np.rint((np.arange(grid.n_cols) + 0.5) * scale_x - 0.5), 0, w - 1).astype(int)
    return mask[np.ix_(ys, xs)].reshape(-1)


class MaskDirectorySource:
    """Precomputed binary objectness masks: ``<root>/<image_id>.png``.

    Single channel, 0 = background, 255 = foreground.
    """

    def __init__(self, root):
        self.root = str(root)

    def __call__(self, image_id: str) -> np.ndarray:
        path = os.path.join(self.root, f"{image_id}.png")
        if not os.path.exists(path):
            raise NotFoundError(f"objectness mask not found: {path}")
        arr = np.asarray(Image.open(path).convert("L"))
        values = np.unique(arr)
        if not np.all(np.isin(values, (0, 255))):
            raise InvalidArgumentError(
                f"{path}: mask must be binary 0/255, found values {values[:8].tolist()}"
            )
        return arr > 0


def load_objectness_target(image_id: str, source, grid: PatchGrid) -> ObjectnessMap:
    """Load a foreground/background mask and sample it onto the patch grid.

    ``source`` is any callable mapping an image id to a pixel-level
    boolean (or 0/255) mask -- a mask directory by default, or a pluggable
    saliency model.
    """
    mask = np.asarray(source(image_id))
    if mask.ndim != 2:
        raise InvalidArgumentError(f"objectness mask must be 2-D, got shape {mask.shape}")
    if mask.dtype != np.bool_:
        values = np.unique(mask)
        if not np.all(np.isin(values, (0, 1, 255))):
            raise InvalidArgumentError(f"objectness mask is not binary: values {values[:8].tolist()}")
        mask = mask > 0
    return ObjectnessMap.from_binary(grid, resample_mask_to_grid(mask, grid))
