"""Training-time augmentations applied jointly to image and objectness mask.

Geometric transforms (scale, crop, flip) move the mask with the image so
teacher targets always see the augmented geometry; photometric jitter
touches the image only.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

from .config import AugmentationFlags

SCALE_RANGE = (0.5, 2.0)
JITTER = 0.25
FLIP_P = 0.5


def _resize(image: np.ndarray, mask, new_h: int, new_w: int):
    img = Image.fromarray(np.clip(image * 255.0, 0, 255).astype(np.uint8))
    image = np.asarray(img.resize((new_w, new_h), Image.BILINEAR), dtype=np.float64) / 255.0
    if mask is not None:
        m = Image.fromarray(mask.astype(np.uint8) * 255)
        mask = np.asarray(m.resize((new_w, new_h), Image.NEAREST)) > 0
    return image, mask


def _crop_or_pad(image, mask, size: int, rng):
    h, w = image.shape[:2]
    pad_h, pad_w = max(0, size - h), max(0, size - w)
    if pad_h or pad_w:
        image = np.pad(image, ((0, pad_h), (0, pad_w), (0, 0)))
        if mask is not None:
            mask = np.pad(mask, ((0, pad_h), (0, pad_w)))
        h, w = image.shape[:2]
    y0 = int(rng.integers(0, h - size + 1))
    x0 = int(rng.integers(0, w - size + 1))
    image = image[y0 : y0 + size, x0 : x0 + size]
    if mask is not None:
        mask = mask[y0 : y0 + size, x0 : x0 + size]
    return image, mask


def _photometric(image, rng):
    brightness, contrast, saturation = rng.uniform(1.0 - JITTER, 1.0 + JITTER, size=3)
    image = image * brightness
    image = image.mean() + (image - image.mean()) * contrast
    gray = image @ np.array([0.299, 0.587, 0.114])
    image = gray[:, :, None] + (image - gray[:, :, None]) * saturation
    return np.clip(image, 0.0, 1.0)


def augment_sample(image, mask, flags: AugmentationFlags, crop_size: int, rng):
    """Apply the configured augmentations; returns (image, mask)."""
    image = np.asarray(image, dtype=np.float64)
    if flags.random_scale_crop:
        scale = float(rng.uniform(*SCALE_RANGE))
        h, w = image.shape[:2]
        image, mask = _resize(image, mask, max(1, round(h * scale)), max(1, round(w * scale)))
        image, mask = _crop_or_pad(image, mask, crop_size, rng)
    if flags.flip and rng.random() < FLIP_P:
        image = image[:, ::-1].copy()
        if mask is not None:
            mask = mask[:, ::-1].copy()
    if flags.photometric:
        image = _photometric(image, rng)
    return image, mask
