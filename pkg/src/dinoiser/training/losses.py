"""Binary cross-entropy objectives for the two heads.

Both losses are negated means (non-negative, zero only at clamped perfect
prediction) and return analytic gradients w.r.t. their direct input;
``gradients.py`` chains these through the head parameters.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

# Probability clamp for the correlation objective.  Tight enough that a
# fully saturated prediction scores below 1e-6, which the acceptance
# tolerance for saturated losses requires.
CLAMP_EPS = 1e-7


def _values(x):
    return np.asarray(getattr(x, "values", x), dtype=np.float64)


def correlation_loss(predicted, target):
    """Mean BCE between affinities (mapped to [0,1]) and boolean targets.

    Affinities in [-1, 1] become probabilities via q = (a+1)/2, clamped
    away from {0, 1}.  Averaged over all N^2 ordered pairs.  Returns
    ``(loss, dloss/daffinity)``; gradients are zero where the clamp is
    active.
    """
    a = _values(predicted)
    d = _values(target).astype(np.float64)
    if a.shape != d.shape:
        raise ValueError(f"shape mismatch: predicted {a.shape} vs target {d.shape}")
    raw_q = (a + 1.0) / 2.0
    q = np.clip(raw_q, CLAMP_EPS, 1.0 - CLAMP_EPS)
    loss = float(-np.mean(d * np.log(q) + (1.0 - d) * np.log1p(-q)))
    interior = (raw_q > CLAMP_EPS) & (raw_q < 1.0 - CLAMP_EPS)
    grad = np.where(interior, (q - d) / (q * (1.0 - q)), 0.0) / (2.0 * a.size)
    return loss, grad


def objectness_loss(logits, target):
    """Mean BCE between per-patch logits and a binary foreground target.

    Uses the log-sum-exp form (softplus), so arbitrarily large logits stay
    finite.  Returns ``(loss, dloss/dlogits)``.
    """
    z = np.asarray(getattr(logits, "logits", logits), dtype=np.float64)
    m = np.asarray(getattr(target, "binary", target), dtype=np.float64)
    if z.shape != m.shape:
        raise ValueError(f"shape mismatch: logits {z.shape} vs target {m.shape}")
    softplus = np.logaddexp(0.0, z)
    softplus_neg = np.logaddexp(0.0, -z)
    loss = float(np.mean(m * softplus_neg + (1.0 - m) * softplus))
    grad = (expit(z) - m) / z.size
    return loss, grad
