"""The two light convolutional heads and their inference operations.

An affinity head (one 3x3 conv) projects intermediate patch features into
a small space whose cosine Gram matrix mimics the teacher's correlations;
an objectness head (one 1x1 conv) predicts a per-patch foreground logit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..errors import InvalidArgumentError
from ..types import PatchFeatureMap, PatchGrid
from .affinity import TAG_LEARNED, AffinityMatrix, compute_affinity


@dataclass(frozen=True)
class AffinityHead:
    """Single 3x3 convolution projecting d_in channels down to d_g."""

    kernel: np.ndarray  # (3, 3, d_in, d_g)
    bias: np.ndarray  # (d_g,)
    input_tap: int

    def __post_init__(self):
        if self.kernel.ndim != 4 or self.kernel.shape[:2] != (3, 3):
            raise InvalidArgumentError(f"affinity kernel must be (3,3,d_in,d_g), got {self.kernel.shape}")
        d_in, d_g = self.kernel.shape[2:]
        if d_g >= d_in:
            raise InvalidArgumentError(f"projection dim {d_g} must be smaller than input dim {d_in}")
        if self.bias.shape != (d_g,):
            raise InvalidArgumentError(f"affinity bias must be ({d_g},), got {self.bias.shape}")

    @property
    def d_in(self) -> int:
        return self.kernel.shape[2]

    @property
    def d_g(self) -> int:
        return self.kernel.shape[3]


@dataclass(frozen=True)
class ObjectnessHead:
    """Single 1x1 convolution producing one foreground logit per patch."""

    kernel: np.ndarray  # (1, 1, d_in, 1)
    bias: float

    def __post_init__(self):
        if self.kernel.ndim != 4 or self.kernel.shape[:2] != (1, 1) or self.kernel.shape[3] != 1:
            raise InvalidArgumentError(f"objectness kernel must be (1,1,d_in,1), got {self.kernel.shape}")

    @property
    def d_in(self) -> int:
        return self.kernel.shape[2]


@dataclass(frozen=True)
class ObjectnessMap:
    """Per-patch foreground logits and their binarization."""

    grid: PatchGrid
    logits: np.ndarray
    binary: np.ndarray

    def __post_init__(self):
        n = self.grid.n
        if self.logits.shape != (n,) or self.binary.shape != (n,):
            raise InvalidArgumentError(
                f"objectness vectors must be ({n},), got {self.logits.shape}/{self.binary.shape}"
            )

    @classmethod
    def from_logits(cls, grid: PatchGrid, logits: np.ndarray) -> "ObjectnessMap":
        logits = np.asarray(logits, dtype=np.float64).reshape(-1)
        return cls(grid=grid, logits=logits, binary=expit(logits) > 0.5)

    @classmethod
    def from_binary(cls, grid: PatchGrid, binary: np.ndarray) -> "ObjectnessMap":
        binary = np.asarray(binary, dtype=bool).reshape(-1)
        return cls(grid=grid, logits=np.where(binary, 1.0, -1.0), binary=binary)


def im2col3x3(values: np.ndarray, grid: PatchGrid) -> np.ndarray:
    """Unfold patch features into 3x3 neighborhoods (zero-padded borders).

    Returns an (N, 9*d) matrix so the convolution becomes one matmul;
    shared with the training-time backward pass.
    """
    d = values.shape[1]
    x = values.reshape(grid.n_rows, grid.n_cols, d)
    padded = np.pad(x, ((1, 1), (1, 1), (0, 0)))
    cols = np.empty((grid.n_rows, grid.n_cols, 3, 3, d), dtype=np.float64)
    for dy in range(3):
        for dx in range(3):
            cols[:, :, dy, dx, :] = padded[dy : dy + grid.n_rows, dx : dx + grid.n_cols, :]
    return cols.reshape(grid.n, 9 * d)


def affinity_head_forward(features: PatchFeatureMap, head: AffinityHead):
    """Projected features plus the unfolded input (kept for backprop)."""
    if features.dim != head.d_in:
        raise InvalidArgumentError(
            f"feature dim {features.dim} does not match head input dim {head.d_in}"
        )
    cols = im2col3x3(np.asarray(features.values, dtype=np.float64), features.grid)
    projected = cols @ head.kernel.reshape(9 * head.d_in, head.d_g) + head.bias
    return projected, cols


def predict_affinity(intermediate: PatchFeatureMap, head: AffinityHead) -> AffinityMatrix:
    """Learned affinity: project through the 3x3 head, then cosine Gram."""
    projected, _ = affinity_head_forward(intermediate, head)
    proj_map = PatchFeatureMap(
        grid=intermediate.grid, values=projected, source_tag=intermediate.source_tag
    )
    return compute_affinity(proj_map, source_tag=TAG_LEARNED)


def predict_objectness(intermediate: PatchFeatureMap, head: ObjectnessHead) -> ObjectnessMap:
    """Learned objectness: per-patch logit, foreground iff sigmoid > 0.5."""
    if intermediate.dim != head.d_in:
        raise InvalidArgumentError(
            f"feature dim {intermediate.dim} does not match head input dim {head.d_in}"
        )
    logits = intermediate.values @ head.kernel.reshape(head.d_in) + head.bias
    return ObjectnessMap.from_logits(intermediate.grid, logits)
