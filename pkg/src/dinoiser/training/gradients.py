"""Analytic parameter gradients for the two heads.

The chain for the affinity head runs: 3x3 conv -> row L2-normalization ->
Gram matrix -> BCE.  Gradients are verified against central finite
differences in the test suite.
"""

from __future__ import annotations

import numpy as np

from ..denoiser.heads import AffinityHead, ObjectnessHead, affinity_head_forward
from ..errors import DegenerateInputError, InvalidArgumentError
from ..types import PatchFeatureMap
from .losses import correlation_loss, objectness_loss


def affinity_head_gradients(features: PatchFeatureMap, head: AffinityHead, target):
    """Correlation loss and its gradients w.r.t. the affinity head parameters.

    Returns ``(loss, dkernel, dbias)``.
    """
    target_values = np.asarray(getattr(target, "values", target))
    projected, cols = affinity_head_forward(features, head)
    norms = np.linalg.norm(projected, axis=1)
    if np.any(norms == 0.0):
        raise DegenerateInputError("projected features have a zero-norm row")
    unit = projected / norms[:, None]
    affinity = unit @ unit.T
    loss, d_aff = correlation_loss(affinity, target_values)

    d_unit = (d_aff + d_aff.T) @ unit
    d_proj = (d_unit - (d_unit * unit).sum(axis=1, keepdims=True) * unit) / norms[:, None]
    d_kernel = (cols.T @ d_proj).reshape(head.kernel.shape)
    d_bias = d_proj.sum(axis=0)
    return loss, d_kernel, d_bias


def objectness_head_gradients(features: PatchFeatureMap, head: ObjectnessHead, target):
    """Objectness loss and its gradients w.r.t. the 1x1 head parameters.

    Returns ``(loss, dkernel, dbias)``.
    """
    if features.dim != head.d_in:
        raise InvalidArgumentError(
            f"feature dim {features.dim} does not match head input dim {head.d_in}"
        )
    target_binary = np.asarray(getattr(target, "binary", target), dtype=np.float64)
    x = np.asarray(features.values, dtype=np.float64)
    logits = x @ head.kernel.reshape(head.d_in) + head.bias
    loss, d_logits = objectness_loss(logits, target_binary)
    d_kernel = (x.T @ d_logits).reshape(head.kernel.shape)
    d_bias = float(d_logits.sum())
    return loss, d_kernel, d_bias
