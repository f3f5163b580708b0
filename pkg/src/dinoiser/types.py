"""Core domain types: patch grids, dense feature maps, embedded text queries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError

# Tags recording where a dense feature map came from.
SOURCE_MASKCLIP = "maskclip_last"
SOURCE_INTERMEDIATE = "intermediate"
SOURCE_REFINED = "refined"
_SOURCE_TAGS = (SOURCE_MASKCLIP, SOURCE_INTERMEDIATE, SOURCE_REFINED)

TEMPLATE_SINGLE = "single"
TEMPLATE_IMAGENET80 = "imagenet80"


@dataclass(frozen=True)
class PatchGrid:
    """Spatial layout of ViT patch tokens (class token excluded)."""

    n_rows: int
    n_cols: int
    patch_size: int

    def __post_init__(self):
        if self.n_rows <= 0 or self.n_cols <= 0 or self.patch_size <= 0:
            raise InvalidArgumentError(
                f"grid dims must be positive, got {self.n_rows}x{self.n_cols}, "
                f"patch_size={self.patch_size}"
            )

    @property
    def n(self) -> int:
        """Total number of patches."""
        return self.n_rows * self.n_cols


def patch_grid_for(height: int, width: int, patch_size: int) -> PatchGrid:
    """Ceil-division patch grid covering a ``height`` x ``width`` image."""
    if height <= 0 or width <= 0 or patch_size <= 0:
        raise InvalidArgumentError(
            f"dimensions must be positive, got ({height}, {width}, {patch_size})"
        )
    return PatchGrid(
        n_rows=math.ceil(height / patch_size),
        n_cols=math.ceil(width / patch_size),
        patch_size=patch_size,
    )


@dataclass(frozen=True)
class PatchFeatureMap:
    """N x d dense features on a patch grid, row-major over the grid."""

    grid: PatchGrid
    values: np.ndarray
    source_tag: str

    def __post_init__(self):
        if self.source_tag not in _SOURCE_TAGS:
            raise InvalidArgumentError(f"unknown source_tag {self.source_tag!r}")
        if self.values.ndim != 2 or self.values.shape[0] != self.grid.n:
            raise InvalidArgumentError(
                f"feature values must be ({self.grid.n}, d), got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise InvalidArgumentError("feature values contain non-finite entries")

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class TextQuerySet:
    """Prompt strings with their unit-norm embeddings."""

    prompts: tuple
    embeddings: np.ndarray
    has_background: bool = False
    template_set: str = TEMPLATE_SINGLE
    background_index: int | None = field(default=None)

    def __post_init__(self):
        if len(self.prompts) < 1 or self.embeddings.shape[0] != len(self.prompts):
            raise InvalidArgumentError(
                f"need one embedding row per prompt, got {len(self.prompts)} prompts "
                f"and {self.embeddings.shape} embeddings"
            )
        norms = np.linalg.norm(self.embeddings, axis=1)
        if not np.allclose(norms, 1.0, atol=1e-5):
            raise InvalidArgumentError("query embeddings must be L2-normalized")
        if self.has_background and self.background_index is None:
            raise InvalidArgumentError("has_background set without a background_index")

    def __len__(self) -> int:
        return len(self.prompts)

    @property
    def dim(self) -> int:
        return self.embeddings.shape[1]
