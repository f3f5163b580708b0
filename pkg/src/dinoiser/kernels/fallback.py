"""Pure-numpy reference implementations of the hot kernels.

These are the semantics of record; the compiled extension must match them
(up to floating-point summation order).
"""

from __future__ import annotations

import numpy as np


def threshold_pool(affinity, gamma, features):
    """Fused thresholded weighted pooling.

    Weights are the affinity entries at or above ``gamma`` (others zeroed),
    with each patch's self-affinity always retained.  Returns the weighted
    per-row average of ``features`` plus the per-row weight sums; rows whose
    weights sum to zero are left at zero and flagged via the returned sums.
    """
    a = np.asarray(affinity, dtype=np.float64)
    f = np.asarray(features, dtype=np.float64)
    w = np.where(a >= gamma, a, 0.0)
    diag = np.arange(a.shape[0])
    w[diag, diag] = a[diag, diag]
    sums = w.sum(axis=1)
    pooled = w @ f
    ok = sums != 0.0
    pooled[ok] /= sums[ok, None]
    return pooled, sums
