"""Text matching: cosine score maps, labels, and confidences."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError, InvalidArgumentError
from ..types import PatchFeatureMap, PatchGrid, TextQuerySet


def softmax_rows(x: np.ndarray) -> np.ndarray:
    z = x - x.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class SegmentationResult:
    """Per-patch query scores, assigned labels, and confidences.

    ``labels`` starts as the argmax over score rows (ties to the lowest
    query index) but may be reassigned by background refinement; scores
    and confidences are never rewritten.
    """

    grid: PatchGrid
    scores: np.ndarray  # (N, |T|) cosine similarities
    labels: np.ndarray  # (N,) query indices
    confidence: np.ndarray  # (N,) max softmax per row

    def __post_init__(self):
        n = self.grid.n
        if self.scores.ndim != 2 or self.scores.shape[0] != n:
            raise InvalidArgumentError(f"scores must be ({n}, |T|), got {self.scores.shape}")
        if self.labels.shape != (n,) or self.confidence.shape != (n,):
            raise InvalidArgumentError("labels/confidence must be length-N vectors")
        if self.scores.size and (self.scores.min() < -1 - 1e-5 or self.scores.max() > 1 + 1e-5):
            raise InvalidArgumentError("scores must be cosine similarities in [-1, 1]")

    @property
    def n_queries(self) -> int:
        return self.scores.shape[1]

    def with_labels(self, labels: np.ndarray) -> "SegmentationResult":
        return SegmentationResult(
            grid=self.grid, scores=self.scores, labels=labels, confidence=self.confidence
        )


def result_from_scores(grid: PatchGrid, scores: np.ndarray) -> SegmentationResult:
    """Assemble a result from raw score rows (argmax labels, softmax confidence)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.argmax(scores, axis=1)  # numpy argmax takes the lowest index on ties
    confidence = softmax_rows(scores).max(axis=1)
    return SegmentationResult(grid=grid, scores=scores, labels=labels, confidence=confidence)


def similarity_map(pooled: PatchFeatureMap, queries: TextQuerySet) -> SegmentationResult:
    """Cosine similarity of each patch feature against each text query.

    Both sides are L2-normalized here (patch features are normalized at
    matching time only); the most similar query labels each patch.
    """
    if len(queries) < 1:
        raise InvalidArgumentError("need at least one text query")
    if pooled.dim != queries.dim:
        raise InvalidArgumentError(
            f"feature dim {pooled.dim} does not match query dim {queries.dim}"
        )
    vals = np.asarray(pooled.values, dtype=np.float64)
    norms = np.linalg.norm(vals, axis=1)
    if np.any(norms == 0.0):
        bad = int(np.flatnonzero(norms == 0.0)[0])
        raise DegenerateInputError(f"zero-norm pooled feature at patch {bad}")
    scores = (vals / norms[:, None]) @ queries.embeddings.T
    np.clip(scores, -1.0, 1.0, out=scores)
    return result_from_scores(pooled.grid, scores)
