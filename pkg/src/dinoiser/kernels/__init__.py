"""Hot-kernel dispatch: compiled extension when built, numpy fallback otherwise.

Set ``DINOISER_NO_EXT=1`` to force the numpy path (used by the benchmark
and the kernel-equivalence tests).
"""

from __future__ import annotations

import os

import numpy as np

from . import fallback

IMPL = "numpy"
_ext = None

if os.environ.get("DINOISER_NO_EXT") != "1":
    try:
        from . import _pool as _ext  # compiled at install time; optional

        IMPL = "cython"
    except ImportError:
        _ext = None


def _as_c64(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def threshold_pool(affinity, gamma, features):
    """Fused thresholded weighted pooling; see ``fallback.threshold_pool``."""
    if _ext is not None:
        return _ext.threshold_pool(_as_c64(affinity), float(gamma), _as_c64(features))
    return fallback.threshold_pool(affinity, gamma, features)


def available_impls() -> dict:
    """Name -> callable map of every usable implementation."""
    impls = {"numpy": fallback.threshold_pool}
    if _ext is not None:
        impls["cython"] = lambda a, g, f: _ext.threshold_pool(
            _as_c64(a), float(g), _as_c64(f)
        )
    return impls
