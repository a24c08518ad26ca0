"""Posterior-predictive analytics over stored draws: hypothetical second
counts, total-homeless imputation, rent-increase counterfactuals, rate-change
classification, and one-year-ahead forecasts.

Counterfactual pairs are coupled through shared uniforms (binomial draws via
the inverse CDF), so at a rent increase of zero the paired differences vanish
identically, and within a draw the predicted total is monotone in the
hypothetical increase.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit
from scipy.stats import binom

from .gibbs import PosteriorDraws
from .panel import Panel
from .priors import AccuracyPrior, PriorSpec

__all__ = [
    "PosteriorSummary",
    "CounterfactualResult",
    "RateChange",
    "synthetic_count",
    "impute_totals",
    "zri_counterfactual",
    "rate_change",
    "forecast_next_year",
    "summarize",
]


@dataclass(frozen=True)
class PosteriorSummary:
    """Mean and central 95% interval, any shape."""

    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower


def summarize(samples: np.ndarray, axis: int = 0) -> PosteriorSummary:
    return PosteriorSummary(
        mean=samples.mean(axis=axis),
        lower=np.quantile(samples, 0.025, axis=axis),
        upper=np.quantile(samples, 0.975, axis=axis),
    )


@dataclass(frozen=True)
class CounterfactualResult:
    """Paired rent-increase effects per (x, metro, year).

    ``h_diff``/``c_diff`` hold the raw paired difference draws with shape
    (n_draws, n_x, n_metros, n_years); summaries are over the draw axis.  The
    one-sided (right-tail) 95% interval runs from the smallest draw to the
    95th percentile.
    """

    x: np.ndarray
    metro_ids: list[str]
    years: np.ndarray
    h_diff: np.ndarray
    c_diff: np.ndarray

    @property
    def h_summary(self) -> PosteriorSummary:
        return summarize(self.h_diff)

    @property
    def c_summary(self) -> PosteriorSummary:
        return summarize(self.c_diff)

    def one_sided_upper(self, which: str = "h") -> np.ndarray:
        draws = self.h_diff if which == "h" else self.c_diff
        return np.quantile(draws, 0.95, axis=0)

    def one_sided_lower(self, which: str = "h") -> np.ndarray:
        draws = self.h_diff if which == "h" else self.c_diff
        return draws.min(axis=0)


@dataclass(frozen=True)
class RateChange:
    """Per-metro classification of the change in the homelessness rate."""

    metro_ids: list[str]
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    label: list[str]    # "emergency" | "decreasing" | "status_quo"


def _accuracy_arrays(draws: PosteriorDraws, accuracy_priors: dict[str, AccuracyPrior]):
    a = np.stack([accuracy_priors[m].a[1:] for m in draws.metro_ids])
    b = np.stack([accuracy_priors[m].b[1:] for m in draws.metro_ids])
    if a.shape[1] != draws.n_years:
        raise ValueError("accuracy priors and draws cover different year ranges")
    return a, b


def synthetic_count(
    draws: PosteriorDraws, accuracy_priors: dict[str, AccuracyPrior], rng
) -> np.ndarray:
    """Predictive draws of a hypothetical second point-in-time count.

    For each retained draw, thin the latent total with a fresh accuracy draw
    from its prior beta: C* ~ Binomial(H, pi).  Shape (n_draws, n_metros, T).
    """
    a, b = _accuracy_arrays(draws, accuracy_priors)
    shape = draws.H.shape
    pi = rng.beta(np.broadcast_to(a, shape), np.broadcast_to(b, shape))
    return rng.binomial(draws.H, pi)


def impute_totals(draws: PosteriorDraws) -> PosteriorSummary:
    """Posterior summary of the total homeless population per (metro, year)."""
    return summarize(draws.H.astype(float))


def zri_counterfactual(
    draws: PosteriorDraws,
    panel: Panel,
    x,
    rng,
    accuracy_priors: dict[str, AccuracyPrior],
) -> CounterfactualResult:
    """Predicted increases in total and counted homeless when the rent-index
    change grows by x (one or several values).

    Per draw m: shift the log odds by phi^(m) x, redraw the total from
    Binomial(N, logistic(psi^(m) + phi^(m) x)) with the census population N,
    and thin with a shared accuracy draw.  The baseline (x = 0) total is
    resampled through the same uniforms, so differences at x = 0 are exactly
    zero and grow monotonically with x within every draw.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xs < 0):
        raise ValueError("rent increases x must be nonnegative")
    M, n, T = draws.H.shape
    N = np.stack([panel.metro(mid).population[1:] for mid in draws.metro_ids])
    a, b = _accuracy_arrays(draws, accuracy_priors)

    u_h = rng.random((M, n, T))         # shared across x: couples the binomial draws
    pi = rng.beta(np.broadcast_to(a, (M, n, T)), np.broadcast_to(b, (M, n, T)))
    u_c = rng.random((M, n, T))

    h_diff = np.empty((M, len(xs), n, T))
    c_diff = np.empty((M, len(xs), n, T))
    p_base = expit(draws.psi)
    h_base = binom.ppf(u_h, N[None, :, :], p_base).astype(np.int64)
    c_base = binom.ppf(u_c, h_base, pi).astype(np.int64)
    for k, xv in enumerate(xs):
        p_x = expit(draws.psi + draws.phi[:, :, None] * xv)
        h_x = binom.ppf(u_h, N[None, :, :], p_x).astype(np.int64)
        c_x = binom.ppf(u_c, h_x, pi).astype(np.int64)
        h_diff[:, k] = h_x - h_base
        c_diff[:, k] = c_x - c_base
    return CounterfactualResult(
        x=xs,
        metro_ids=draws.metro_ids,
        years=draws.years.copy(),
        h_diff=h_diff,
        c_diff=c_diff,
    )


def rate_change(
    draws: PosteriorDraws, t_from: int = 1, t_to: int | None = None, bound: float = 0.04
) -> RateChange:
    """Classify each metro by the percent change in its homelessness rate
    between two modeled years (1-based indices; defaults: first to last).

    The rate is the logistic transform of the log-odds draw, so the
    classification never touches the count scale.  A metro is ``emergency``
    when the 95% interval of the change sits above +bound, ``decreasing``
    when it sits below -bound, else ``status_quo``.
    """
    t_to = draws.n_years if t_to is None else t_to
    for t in (t_from, t_to):
        if not 1 <= t <= draws.n_years:
            raise ValueError(f"year index {t} outside 1..{draws.n_years}")
    p_from = expit(draws.psi[:, :, t_from - 1])
    p_to = expit(draws.psi[:, :, t_to - 1])
    change = (p_to - p_from) / p_from
    s = summarize(change)
    labels = []
    for lo, hi in zip(s.lower, s.upper):
        if lo > bound:
            labels.append("emergency")
        elif hi < -bound:
            labels.append("decreasing")
        else:
            labels.append("status_quo")
    return RateChange(
        metro_ids=draws.metro_ids, mean=s.mean, lower=s.lower, upper=s.upper, label=labels
    )


def forecast_next_year(
    draws: PosteriorDraws,
    panel: Panel,
    zri_next: dict[str, float],
    prior_spec: PriorSpec,
    rng,
) -> np.ndarray:
    """One-year-ahead predictive draws of the total homeless population.

    Per draw: advance the population log odds by the metro drift plus
    innovation noise, draw the next population from its Poisson law, advance
    the homelessness log odds by the rent effect times next year's rent
    change plus innovation noise, and draw the total from its binomial law.
    Shape (n_draws, n_metros).
    """
    M, n, T = draws.H.shape
    lambda_bar = np.array(
        [prior_spec.lambda_scale * panel.metro(mid).population[0] for mid in draws.metro_ids]
    )
    zri_last = np.array([panel.metro(mid).zri[-1] for mid in draws.metro_ids])
    dzri_next = np.array(
        [(zri_next[mid] - zl) / zl for mid, zl in zip(draws.metro_ids, zri_last)]
    )

    eta_next = (
        draws.eta[:, :, -1]
        + draws.nu
        + rng.normal(0.0, np.sqrt(prior_spec.sigma2_eta), size=(M, n))
    )
    N_next = rng.poisson(lambda_bar[None, :] * expit(eta_next))
    psi_next = (
        draws.psi[:, :, -1]
        + draws.phi * dzri_next[None, :]
        + rng.normal(0.0, np.sqrt(prior_spec.sigma2_psi), size=(M, n))
    )
    return rng.binomial(N_next, expit(psi_next))
