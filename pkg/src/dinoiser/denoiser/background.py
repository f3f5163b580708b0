"""Uncertainty-gated background refinement."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidArgumentError
from .heads import ObjectnessMap
from .matching import SegmentationResult


def refine_background(
    result: SegmentationResult,
    objectness: ObjectnessMap,
    delta: float,
    background_index: int,
) -> SegmentationResult:
    """Reassign uncertain background patches to the background query.

    A patch moves to ``background_index`` iff its confidence is strictly
    below ``delta`` AND the objectness map marks it as background.  Both
    conditions must hold: confident patches and foreground patches are
    never touched, and scores stay unchanged.
    """
    if result.grid != objectness.grid:
        raise InvalidArgumentError(
            f"grid mismatch: result {result.grid} vs objectness {objectness.grid}"
        )
    if not 0.0 <= delta <= 1.0:
        raise InvalidArgumentError(f"delta must lie in [0, 1], got {delta}")
    if not 0 <= background_index < result.n_queries:
        raise InvalidArgumentError(
            f"background index {background_index} outside 0..{result.n_queries - 1}"
        )
    reassign = (result.confidence < delta) & ~objectness.binary
    labels = result.labels.copy()
    labels[reassign] = background_index
    return result.with_labels(labels)


def refinement_mask(result: SegmentationResult) -> np.ndarray:
    """Patches whose label no longer matches the score argmax (i.e. reassigned)."""
    return result.labels != np.argmax(result.scores, axis=1)
