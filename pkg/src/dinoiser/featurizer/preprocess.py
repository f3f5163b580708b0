"""Image preprocessing: shorter-side resize, normalization, patch-multiple padding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from ..errors import InvalidArgumentError


@dataclass(frozen=True)
class PreprocessInfo:
    """Geometry of one preprocessed image.

    original -> resized (aspect-preserving shorter-side resize) -> padded
    (zeros appended at bottom/right up to patch multiples).
    """

    original_h: int
    original_w: int
    resized_h: int
    resized_w: int
    padded_h: int
    padded_w: int


def to_float_rgb(image) -> np.ndarray:
    """Accept a PIL image or HxWx3 array; return float64 HxWx3 in [0, 1]."""
    if isinstance(image, Image.Image):
        arr = np.asarray(image.convert("RGB"), dtype=np.float64) / 255.0
        return arr
    arr = np.asarray(image)
    if arr.ndim == 2:
        arr = np.stack([arr] * 3, axis=-1)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidArgumentError(f"expected HxWx3 image, got shape {arr.shape}")
    if arr.dtype == np.uint8:
        return arr.astype(np.float64) / 255.0
    arr = arr.astype(np.float64)
    if arr.size and arr.max() > 1.5:  # heuristics: 0..255 floats
        arr = arr / 255.0
    return arr


def resize_shorter_side(arr: np.ndarray, target: int) -> np.ndarray:
    """Bicubic aspect-preserving resize so min(H, W) == target."""
    h, w = arr.shape[:2]
    if min(h, w) == target:
        return arr
    scale = target / min(h, w)
    new_h, new_w = max(1, round(h * scale)), max(1, round(w * scale))
    img = Image.fromarray(np.clip(arr * 255.0, 0, 255).astype(np.uint8))
    img = img.resize((new_w, new_h), Image.BICUBIC)
    return np.asarray(img, dtype=np.float64) / 255.0


def prepare(image, patch_size: int, resize_shorter: int | None, mean, std):
    """Full preprocessing chain; returns (chw array, PreprocessInfo)."""
    arr = to_float_rgb(image)
    original_h, original_w = arr.shape[:2]
    if resize_shorter is not None:
        arr = resize_shorter_side(arr, resize_shorter)
    resized_h, resized_w = arr.shape[:2]
    arr = (arr - np.asarray(mean)) / np.asarray(std)
    pad_h = (-resized_h) % patch_size
    pad_w = (-resized_w) % patch_size
    if pad_h or pad_w:
        arr = np.pad(arr, ((0, pad_h), (0, pad_w), (0, 0)))
    info = PreprocessInfo(
        original_h=original_h,
        original_w=original_w,
        resized_h=resized_h,
        resized_w=resized_w,
        padded_h=resized_h + pad_h,
        padded_w=resized_w + pad_w,
    )
    return arr.transpose(2, 0, 1), info
