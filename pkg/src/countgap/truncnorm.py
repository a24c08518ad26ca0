"""Lower-truncated normal sampling.

Inverse-CDF sampling is used for moderate truncation; when the truncation
point sits more than 4 standard deviations above the mean the inverse CDF
loses resolution, so a one-sided exponential rejection sampler takes over
(bounded expected number of proposals at any truncation level).
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtr, ndtri

_REJECTION_CUTOFF = 4.0


def sample_truncated_normal(mean, sd, lower, rng) -> np.ndarray | float:
    """Draw from N(mean, sd^2) conditioned on exceeding ``lower``, element-wise."""
    mean = np.asarray(mean, dtype=float)
    sd = np.asarray(sd, dtype=float)
    if np.any(sd <= 0):
        raise ValueError("sd must be positive")
    scalar = mean.ndim == 0 and sd.ndim == 0 and np.ndim(lower) == 0
    mean, sd, lower = np.broadcast_arrays(np.atleast_1d(mean), sd, lower)
    alpha = (lower - mean) / sd

    out = np.empty(alpha.shape, dtype=float)
    easy = alpha < _REJECTION_CUTOFF
    if np.any(easy):
        lo = ndtr(alpha[easy])
        u = lo + (1.0 - lo) * rng.random(int(easy.sum()))
        out[easy] = mean[easy] + sd[easy] * ndtri(u)
    hard = ~easy
    if np.any(hard):
        out[hard] = mean[hard] + sd[hard] * _tail_rejection(alpha[hard], rng)
    return float(out[0]) if scalar else out


def _tail_rejection(alpha: np.ndarray, rng) -> np.ndarray:
    # Robert's exponential proposal for the standard-normal tail beyond alpha
    rate = 0.5 * (alpha + np.sqrt(alpha * alpha + 4.0))
    z = np.empty_like(alpha)
    pending = np.ones(alpha.shape, dtype=bool)
    while np.any(pending):
        n = int(pending.sum())
        prop = alpha[pending] + rng.exponential(size=n) / rate[pending]
        accept = rng.random(n) <= np.exp(-0.5 * (prop - rate[pending]) ** 2)
        idx = np.flatnonzero(pending)[accept]
        z[idx] = prop[accept]
        pending[idx] = False
    return z
