"""Patch-grid to pixel-grid resampling of scores and label maps."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidArgumentError
from .background import refinement_mask
from .matching import SegmentationResult


def _src_coords(out_size: int, scale: float) -> np.ndarray:
    """Source coordinates of output pixel centers (half-pixel convention)."""
    return (np.arange(out_size) + 0.5) * scale - 0.5


def bilinear_resample(arr: np.ndarray, out_h: int, out_w: int, scale_y=None, scale_x=None):
    """Bilinear resample of an (R, C, K) stack to (out_h, out_w, K).

    ``scale_*`` maps output pixels into source cells and defaults to plain
    grid-to-target scaling; edge samples clamp.  With a scale of exactly 1
    the mapping is the identity.
    """
    r, c = arr.shape[:2]
    ys = np.clip(_src_coords(out_h, (r / out_h) if scale_y is None else scale_y), 0, r - 1)
    xs = np.clip(_src_coords(out_w, (c / out_w) if scale_x is None else scale_x), 0, c - 1)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, r - 1)
    x1 = np.minimum(x0 + 1, c - 1)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]
    a00 = arr[np.ix_(y0, x0)]
    a01 = arr[np.ix_(y0, x1)]
    a10 = arr[np.ix_(y1, x0)]
    a11 = arr[np.ix_(y1, x1)]
    top = a00 * (1 - fx) + a01 * fx
    bot = a10 * (1 - fx) + a11 * fx
    return top * (1 - fy) + bot * fy


def nearest_indices(out_h: int, out_w: int, rows: int, cols: int, scale_y=None, scale_x=None):
    """(row, col) of the nearest source cell for every output pixel."""
    ys = _src_coords(out_h, (rows / out_h) if scale_y is None else scale_y)
    xs = _src_coords(out_w, (cols / out_w) if scale_x is None else scale_x)
    ry = np.clip(np.rint(ys).astype(np.int64), 0, rows - 1)
    rx = np.clip(np.rint(xs).astype(np.int64), 0, cols - 1)
    return ry, rx


def upsample_to_pixels(result: SegmentationResult, height: int, width: int) -> np.ndarray:
    """Pixel label map from a patch-level result.

    Score channels are bilinearly interpolated to the target size and
    argmax-ed per pixel; patches that background refinement reassigned
    keep their patch-level decision via nearest-neighbor expansion.
    """
    grid = result.grid
    if height < grid.n_rows or width < grid.n_cols:
        raise InvalidArgumentError(
            f"target {height}x{width} smaller than grid {grid.n_rows}x{grid.n_cols}"
        )
    stack = result.scores.reshape(grid.n_rows, grid.n_cols, result.n_queries)
    up = bilinear_resample(stack, height, width)
    labels = np.argmax(up, axis=2)

    overridden = refinement_mask(result)
    if overridden.any():
        ry, rx = nearest_indices(height, width, grid.n_rows, grid.n_cols)
        patch_idx = ry[:, None] * grid.n_cols + rx[None, :]
        mask = overridden[patch_idx]
        labels[mask] = result.labels[patch_idx[mask]]
    return labels
