"""Indexed-color palettes and mask image export."""

from __future__ import annotations

import numpy as np
from PIL import Image

from ..errors import InvalidArgumentError


def default_palette(n_classes: int) -> np.ndarray:
    """Standard segmentation colormap (bit-interleaved), shape (n, 3) uint8."""
    palette = np.zeros((n_classes, 3), dtype=np.uint8)
    for idx in range(n_classes):
        c = idx
        r = g = b = 0
        for shift in range(8):
            r |= ((c >> 0) & 1) << (7 - shift)
            g |= ((c >> 1) & 1) << (7 - shift)
            b |= ((c >> 2) & 1) << (7 - shift)
            c >>= 3
        palette[idx] = (r, g, b)
    return palette


def load_palette(path) -> np.ndarray:
    """Read a palette file: one ``index r g b`` line per class."""
    entries = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise InvalidArgumentError(f"palette line must be 'index r g b': {line!r}")
            entries[int(parts[0])] = tuple(int(v) for v in parts[1:])
    if not entries or sorted(entries) != list(range(len(entries))):
        raise InvalidArgumentError("palette indices must be contiguous from 0")
    return np.array([entries[i] for i in range(len(entries))], dtype=np.uint8)


def save_palette(path, palette: np.ndarray) -> None:
    with open(path, "w") as fh:
        fh.write("# class index -> RGB\n")
        for idx, (r, g, b) in enumerate(palette):
            fh.write(f"{idx} {r} {g} {b}\n")


def save_mask_png(path, labels: np.ndarray, palette: np.ndarray) -> None:
    """Write a label map as an indexed-color PNG."""
    if labels.max(initial=0) >= len(palette):
        raise InvalidArgumentError(
            f"label {int(labels.max())} has no palette entry (palette size {len(palette)})"
        )
    img = Image.fromarray(labels.astype(np.uint8), mode="P")
    img.putpalette(palette.astype(np.uint8).tobytes())
    img.save(path, format="PNG")
