"""Affinity-guided feature pooling."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateInputError, InvalidArgumentError
from ..types import SOURCE_REFINED, PatchFeatureMap
from .affinity import AffinityMatrix, PoolingWeights
from .. import kernels


def guided_pool(features: PatchFeatureMap, weights: PoolingWeights) -> PatchFeatureMap:
    """Per-patch weighted average of features under the pooling weights.

    Output row p is sum_q w[p,q] * features[q] / sum_q w[p,q]; a voting
    scheme that pulls each patch towards the features of the patches it
    correlates with.
    """
    if features.grid != weights.grid:
        raise InvalidArgumentError(
            f"grid mismatch: features {features.grid} vs weights {weights.grid}"
        )
    w = np.asarray(weights.values, dtype=np.float64)
    sums = w.sum(axis=1)
    if np.any(sums <= 0.0):
        bad = int(np.flatnonzero(sums <= 0.0)[0])
        raise DegenerateInputError(f"non-positive pooling weight sum at patch {bad}")
    pooled = (w @ np.asarray(features.values, dtype=np.float64)) / sums[:, None]
    return PatchFeatureMap(grid=features.grid, values=pooled, source_tag=SOURCE_REFINED)


def pool_with_affinity(
    features: PatchFeatureMap, affinity: AffinityMatrix, gamma: float
) -> PatchFeatureMap:
    """Fused threshold + pool via the hot kernel.

    Equivalent to ``guided_pool(features, threshold_affinity(affinity,
    gamma))`` without materializing the thresholded matrix.
    """
    if features.grid != affinity.grid:
        raise InvalidArgumentError(
            f"grid mismatch: features {features.grid} vs affinity {affinity.grid}"
        )
    pooled, sums = kernels.threshold_pool(affinity.values, gamma, features.values)
    if np.any(sums <= 0.0):
        bad = int(np.flatnonzero(sums <= 0.0)[0])
        raise DegenerateInputError(f"non-positive pooling weight sum at patch {bad}")
    return PatchFeatureMap(grid=features.grid, values=pooled, source_tag=SOURCE_REFINED)
