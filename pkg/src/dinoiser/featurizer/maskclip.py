"""Dense image encoding: text-aligned patch features plus intermediate taps."""

from __future__ import annotations

from dataclasses import dataclass

from ..types import SOURCE_INTERMEDIATE, SOURCE_MASKCLIP, PatchFeatureMap, PatchGrid
from .backbone import BackboneHandle
from .preprocess import PreprocessInfo, prepare


@dataclass(frozen=True)
class DenseEncoding:
    """Output of one dense encode: both feature maps share one grid."""

    last: PatchFeatureMap
    intermediate: PatchFeatureMap
    preprocess: PreprocessInfo

    @property
    def grid(self) -> PatchGrid:
        return self.last.grid


def encode_image_dense(image, backbone: BackboneHandle) -> DenseEncoding:
    """Encode an image into dense text-aligned and intermediate feature maps.

    One forward pass.  The class token is dropped from both maps; the
    final attention layer's query/key mixing is discarded for the ``last``
    map (per-patch value + output projections only).
    """
    chw, info = prepare(
        image,
        patch_size=backbone.patch_size,
        resize_shorter=backbone.resize_shorter,
        mean=backbone.image_mean,
        std=backbone.image_std,
    )
    out = backbone.vision.forward(chw, tap_layer=backbone.tap_layer)
    n_rows, n_cols = out["grid_shape"]
    grid = PatchGrid(n_rows=n_rows, n_cols=n_cols, patch_size=backbone.patch_size)
    return DenseEncoding(
        last=PatchFeatureMap(grid=grid, values=out["dense"][1:], source_tag=SOURCE_MASKCLIP),
        intermediate=PatchFeatureMap(
            grid=grid, values=out["tap"][1:], source_tag=SOURCE_INTERMEDIATE
        ),
        preprocess=info,
    )
