"""Sliding-window inference over resized images."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..denoiser.pipeline import Pipeline, tile_windows
from ..featurizer.preprocess import resize_shorter_side, to_float_rgb
from ..types import TextQuerySet


@dataclass(frozen=True)
class WindowedScores:
    """Coverage-normalized pixel score map on the resized canvas."""

    scores: np.ndarray  # (H, W, |T|)
    override: np.ndarray  # (H, W) bool, background reassignment votes
    original_h: int
    original_w: int
    n_windows: int

    def labels(self, pipeline: Pipeline, out_h=None, out_w=None, background_index=None):
        """Argmax labels (plus background override) at the target size."""
        out_h = out_h if out_h is not None else self.original_h
        out_w = out_w if out_w is not None else self.original_w
        bg = background_index if background_index is not None else 0
        return pipeline.labels_at(self.scores, self.override, out_h, out_w, bg)


def sliding_window_segment(
    image,
    pipeline: Pipeline,
    queries: TextQuerySet,
    window: int | None = None,
    stride: int | None = None,
) -> WindowedScores:
    """Tile windows over the resized image and accumulate their score maps.

    The image is first resized to the pipeline's shorter-side target; the
    final window on each axis snaps to the border.  Per-window score maps
    are summed with per-pixel coverage counts and normalized; argmax
    happens only after accumulation.  A window request larger than the
    image degenerates to a single (internally padded) window, which makes
    the result bit-identical to ``pipeline.segment``.
    """
    window = window if window is not None else pipeline.config.window
    stride = stride if stride is not None else pipeline.config.stride
    arr = to_float_rgb(image)
    original_h, original_w = arr.shape[:2]
    if pipeline.backbone.resize_shorter is not None:
        arr = resize_shorter_side(arr, pipeline.backbone.resize_shorter)
    h, w = arr.shape[:2]
    tiles = tile_windows(h, w, window, stride)
    scores, override, _ = pipeline.accumulate_windows(arr, tiles, window, queries)
    return WindowedScores(
        scores=scores,
        override=override,
        original_h=original_h,
        original_w=original_w,
        n_windows=len(tiles),
    )
