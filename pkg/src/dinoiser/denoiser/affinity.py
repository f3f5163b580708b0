"""Patch-to-patch affinity matrices and their thresholded pooling weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInputError, InvalidArgumentError
from ..types import PatchGrid

TAG_TEACHER = "teacher"
TAG_LEARNED = "learned"
_AFFINITY_TAGS = (TAG_TEACHER, TAG_LEARNED)

_ATOL = 1e-5


@dataclass(frozen=True)
class AffinityMatrix:
    """N x N cosine similarities between patch features.

    Entries lie in [-1, 1], the matrix is symmetric, and the diagonal is
    exactly 1 (self-similarity).
    """

    grid: PatchGrid
    values: np.ndarray
    source_tag: str

    def __post_init__(self):
        if self.source_tag not in _AFFINITY_TAGS:
            raise InvalidArgumentError(f"unknown affinity source {self.source_tag!r}")
        n = self.grid.n
        if self.values.shape != (n, n):
            raise InvalidArgumentError(
                f"affinity must be ({n}, {n}), got {self.values.shape}"
            )
        v = self.values
        if v.size and (v.min() < -1 - _ATOL or v.max() > 1 + _ATOL):
            raise InvalidArgumentError("affinity entries outside [-1, 1]")
        if not np.allclose(v, v.T, atol=_ATOL):
            raise InvalidArgumentError("affinity matrix must be symmetric")
        if not np.allclose(np.diagonal(v), 1.0, atol=_ATOL):
            raise InvalidArgumentError("affinity diagonal must be 1")


@dataclass(frozen=True)
class PoolingWeights:
    """Thresholded affinities used as pooling weights.

    An entry is zero wherever the source affinity fell below the
    threshold and the verbatim affinity elsewhere; the diagonal always
    survives, so row sums stay positive.
    """

    grid: PatchGrid
    values: np.ndarray

    def __post_init__(self):
        n = self.grid.n
        if self.values.shape != (n, n):
            raise InvalidArgumentError(
                f"pooling weights must be ({n}, {n}), got {self.values.shape}"
            )


def cosine_gram(values: np.ndarray) -> np.ndarray:
    """Row-normalized Gram matrix; raises on zero-norm rows.

    The result is exactly symmetric with unit diagonal (enforced after
    the float matmul so downstream strict comparisons stay consistent).
    """
    vals = np.asarray(values, dtype=np.float64)
    norms = np.linalg.norm(vals, axis=1)
    if np.any(norms == 0.0):
        bad = int(np.flatnonzero(norms == 0.0)[0])
        raise DegenerateInputError(f"zero-norm feature row at patch {bad}")
    unit = vals / norms[:, None]
    gram = unit @ unit.T
    gram = 0.5 * (gram + gram.T)
    np.clip(gram, -1.0, 1.0, out=gram)
    np.fill_diagonal(gram, 1.0)
    return gram


def compute_affinity(features, source_tag: str = TAG_TEACHER) -> AffinityMatrix:
    """Cosine affinity between all patch pairs of a feature map.

    ``features`` is anything with ``grid`` and ``values`` attributes
    (dense student maps or teacher maps).
    """
    return AffinityMatrix(
        grid=features.grid, values=cosine_gram(features.values), source_tag=source_tag
    )


def threshold_affinity(affinity: AffinityMatrix, gamma: float) -> PoolingWeights:
    """Zero out affinities below ``gamma``; keep the rest verbatim.

    The diagonal is preserved regardless, so every patch keeps at least
    its own feature in the pooling support.
    """
    if not -1.0 <= gamma <= 1.0:
        raise InvalidArgumentError(f"gamma must lie in [-1, 1], got {gamma}")
    a = affinity.values
    w = np.where(a >= gamma, a, 0.0)
    diag = np.arange(a.shape[0])
    w[diag, diag] = a[diag, diag]
    return PoolingWeights(grid=affinity.grid, values=w)
