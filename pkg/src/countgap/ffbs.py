"""Forward-filter / backward-sample kernel for a drifting Gaussian random walk
observed through per-time precisions.

The state follows x_t = x_{t-1} + d_t + innovation, innovation ~ N(0, sigma2),
with a Gaussian prior on x_0.  Each time point contributes a likelihood term
exp(kappa_t x_t - omega_t x_t^2 / 2), the conditionally Gaussian form produced
by Pólya-Gamma augmentation of binomial logits.  Filtering runs in variance
form (T is small here, so conditioning is a non-issue):

    predicted:  a_t = m_{t-1} + d_t,  R_t = S_{t-1} + sigma2
    filtered:   S_t = (omega_t + 1/R_t)^{-1},  m_t = S_t (kappa_t + a_t / R_t)

and the backward pass draws x_T ~ N(m_T, S_T) then, for t = T-1..1,

    Stilde_t = (1/S_t + 1/sigma2)^{-1}
    mtilde_t = Stilde_t (m_t / S_t + (x_{t+1} - d_{t+1}) / sigma2).

The baseline state x_0 is marginalized, never sampled: its prior simply makes
the first predicted variance S_0 + sigma2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["FfbsError", "FfbsProblem", "filter_forward", "sample_backward"]


class FfbsError(ValueError):
    """Raised on an invalid problem or a nonfinite filtering intermediate."""


@dataclass(frozen=True)
class FfbsProblem:
    prior_mean: float        # m_0
    prior_var: float         # S_0 > 0
    precision: np.ndarray    # (T,) omega_t > 0
    kappa: np.ndarray        # (T,) pseudo-observations
    drift: np.ndarray        # (T,) d_t added at the transition into time t
    innovation_var: float    # sigma2 > 0

    def __post_init__(self):
        precision = np.asarray(self.precision, dtype=float)
        kappa = np.asarray(self.kappa, dtype=float)
        drift = np.asarray(self.drift, dtype=float)
        if not (len(precision) == len(kappa) == len(drift)):
            raise FfbsError("precision, kappa, drift must share one length")
        if len(precision) == 0:
            raise FfbsError("need at least one time point")
        if np.any(precision <= 0):
            raise FfbsError("all observation precisions must be strictly positive")
        if self.prior_var <= 0 or self.innovation_var <= 0:
            raise FfbsError("prior_var and innovation_var must be strictly positive")
        object.__setattr__(self, "precision", precision)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "drift", drift)

    @property
    def T(self) -> int:
        return len(self.precision)


def filter_forward(problem: FfbsProblem) -> tuple[np.ndarray, np.ndarray]:
    """Filtered means and variances (m_t, S_t) for t = 1..T."""
    T = problem.T
    m = np.empty(T)
    S = np.empty(T)
    prev_m, prev_S = problem.prior_mean, problem.prior_var
    for t in range(T):
        R = prev_S + problem.innovation_var
        a = prev_m + problem.drift[t]
        S[t] = 1.0 / (problem.precision[t] + 1.0 / R)
        m[t] = S[t] * (problem.kappa[t] + a / R)
        if not (np.isfinite(m[t]) and np.isfinite(S[t]) and S[t] > 0):
            raise FfbsError(f"nonfinite filtered moments at t={t + 1}")
        prev_m, prev_S = m[t], S[t]
    return m, S


def sample_backward(problem: FfbsProblem, filtered, rng, n_paths: int | None = None):
    """Draw state paths x_{1:T} given filtered moments from :func:`filter_forward`.

    Returns shape (T,) for a single path, or (n_paths, T) when ``n_paths`` is
    given (paths are drawn jointly per time step, vectorized).
    """
    m, S = filtered
    T = problem.T
    single = n_paths is None
    n = 1 if single else n_paths
    paths = np.empty((n, T))
    paths[:, T - 1] = m[T - 1] + np.sqrt(S[T - 1]) * rng.standard_normal(n)
    for t in range(T - 2, -1, -1):
        S_t = 1.0 / (1.0 / S[t] + 1.0 / problem.innovation_var)
        mean = S_t * (m[t] / S[t] + (paths[:, t + 1] - problem.drift[t + 1]) / problem.innovation_var)
        paths[:, t] = mean + np.sqrt(S_t) * rng.standard_normal(n)
    return paths[0] if single else paths
