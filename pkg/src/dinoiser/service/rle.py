"""Run-length encoding of patch label vectors (row-major)."""

from __future__ import annotations

import numpy as np


def encode_rle(labels) -> list:
    """[[value, count], ...] runs over a flat label vector."""
    labels = np.asarray(labels).reshape(-1)
    if labels.size == 0:
        return []
    boundaries = np.flatnonzero(np.diff(labels)) + 1
    starts = np.concatenate([[0], boundaries])
    ends = np.concatenate([boundaries, [labels.size]])
    return [[int(labels[s]), int(e - s)] for s, e in zip(starts, ends)]


def decode_rle(runs, length: int | None = None) -> np.ndarray:
    out = np.concatenate([np.full(count, value, dtype=np.int64) for value, count in runs]) \
        if runs else np.empty(0, dtype=np.int64)
    if length is not None and out.size != length:
        raise ValueError(f"RLE decodes to {out.size} labels, expected {length}")
    return out
