"""Teacher features from a frozen self-supervised ViT."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError, InvalidArgumentError
from ..featurizer.backbone import BackboneHandle
from ..featurizer.preprocess import prepare
from ..types import PatchGrid

EMBEDDING_KINDS = ("value", "key", "query")


@dataclass(frozen=True)
class TeacherFeatureMap:
    """Last-attention-layer embeddings of the teacher, class token dropped."""

    grid: PatchGrid
    values: np.ndarray
    embedding_kind: str

    def __post_init__(self):
        if self.embedding_kind not in EMBEDDING_KINDS:
            raise InvalidArgumentError(f"embedding kind must be one of {EMBEDDING_KINDS}")
        if self.values.ndim != 2 or self.values.shape[0] != self.grid.n:
            raise InvalidArgumentError(
                f"teacher values must be ({self.grid.n}, d), got {self.values.shape}"
            )
        norms = np.linalg.norm(self.values, axis=1)
        if np.any(norms == 0.0):
            raise DegenerateInputError("teacher feature map has a zero-norm row")

    @property
    def dim(self) -> int:
        return self.values.shape[1]


def teacher_features(
    image, backbone: BackboneHandle, embedding_kind: str = "value"
) -> TeacherFeatureMap:
    """Extract the chosen last-layer attention embeddings from the teacher.

    ``value`` is the default: its patch correlations separate regions more
    finely than key or query embeddings.  Per-head vectors are kept
    concatenated, before the attention output projection.
    """
    if embedding_kind not in EMBEDDING_KINDS:
        raise InvalidArgumentError(
            f"embedding kind {embedding_kind!r} not in {EMBEDDING_KINDS}"
        )
    chw, _ = prepare(
        image,
        patch_size=backbone.patch_size,
        resize_shorter=backbone.resize_shorter,
        mean=backbone.image_mean,
        std=backbone.image_std,
    )
    out = backbone.vision.forward(chw, tap_layer=backbone.tap_layer)
    n_rows, n_cols = out["grid_shape"]
    return TeacherFeatureMap(
        grid=PatchGrid(n_rows=n_rows, n_cols=n_cols, patch_size=backbone.patch_size),
        values=out[embedding_kind][1:],
        embedding_kind=embedding_kind,
    )
