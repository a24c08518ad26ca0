"""Forward generative simulator and brute-force oracles.

The simulator runs the full generative model forward (ancestral sampling) to
produce synthetic panels with known parameters, used for sampler validation
and coverage studies.  The oracles evaluate, by direct enumeration or dense
linear algebra, the same distributions that the samplers target by cleverer
means; they are deliberately slow and simple.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, gammaln

from .ffbs import FfbsProblem
from .panel import MetroSeries, Panel
from .priors import (
    AccuracyScenario,
    PriorSpec,
    accuracy_trajectory,
    baseline_accuracy_mean,
    unsheltered_delta,
)
from .truncnorm import sample_truncated_normal

__all__ = [
    "TrueParams",
    "GroundTruth",
    "RATE_FLOOR",
    "generate_panel",
    "default_true_params",
    "betabinomial_pmf",
    "brute_force_H_pmf",
    "smoothed_moments_dense",
]

# identifiability floor: inference degrades once the homelessness rate drops
# below 0.05% of the total population
RATE_FLOOR = 0.0005


@dataclass(frozen=True)
class TrueParams:
    """Generating parameters for a synthetic panel (arrays over metros)."""

    phi: np.ndarray                 # rent effect, > 0
    nu: np.ndarray                  # population drift
    baseline_population: np.ndarray
    baseline_rate: np.ndarray       # homelessness rate anchoring the baseline log odds
    sheltered_share: np.ndarray     # of the baseline count
    zri0: np.ndarray
    dzri: np.ndarray                # (n_metros, T) relative rent changes

    def __post_init__(self):
        n = len(self.phi)
        for name in ("nu", "baseline_population", "baseline_rate", "sheltered_share", "zri0"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} must have length {n}")
        if self.dzri.shape[0] != n:
            raise ValueError("dzri must have one row per metro")
        if np.any(self.phi <= 0):
            raise ValueError("true rent effects must be positive")

    def to_json(self, path) -> None:
        payload = {
            k: np.asarray(getattr(self, k)).tolist()
            for k in (
                "phi", "nu", "baseline_population", "baseline_rate",
                "sheltered_share", "zri0", "dzri",
            )
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)

    @classmethod
    def from_json(cls, path) -> "TrueParams":
        with open(path) as fh:
            payload = json.load(fh)
        return cls(
            phi=np.array(payload["phi"]),
            nu=np.array(payload["nu"]),
            baseline_population=np.array(payload["baseline_population"], dtype=np.int64),
            baseline_rate=np.array(payload["baseline_rate"]),
            sheltered_share=np.array(payload["sheltered_share"]),
            zri0=np.array(payload["zri0"]),
            dzri=np.array(payload["dzri"]),
        )


@dataclass(frozen=True)
class GroundTruth:
    """Latent states and parameters behind a generated panel (index 0 = baseline)."""

    phi: np.ndarray
    nu: np.ndarray
    eta: np.ndarray        # (n, T+1)
    psi: np.ndarray        # (n, T+1)
    H: np.ndarray          # (n, T+1)
    pi: np.ndarray         # (n, T+1)
    theta: np.ndarray      # (n, T+1)
    lambda_bar: np.ndarray
    below_floor: np.ndarray  # metros whose homelessness rate dipped below RATE_FLOOR

    def to_json(self, path) -> None:
        payload = {
            k: np.asarray(getattr(self, k)).tolist()
            for k in ("phi", "nu", "eta", "psi", "H", "pi", "theta", "lambda_bar", "below_floor")
        }
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=1)

    @classmethod
    def from_json(cls, path) -> "GroundTruth":
        with open(path) as fh:
            payload = json.load(fh)
        return cls(
            phi=np.array(payload["phi"]),
            nu=np.array(payload["nu"]),
            eta=np.array(payload["eta"]),
            psi=np.array(payload["psi"]),
            H=np.array(payload["H"], dtype=np.int64),
            pi=np.array(payload["pi"]),
            theta=np.array(payload["theta"]),
            lambda_bar=np.array(payload["lambda_bar"]),
            below_floor=np.array(payload["below_floor"], dtype=bool),
        )


def default_true_params(
    n_metros: int,
    T: int,
    rng,
    spec: PriorSpec | None = None,
    *,
    population_range: tuple[float, float] = (3e5, 3e6),
    rate_range: tuple[float, float] = (0.002, 0.008),
    dzri_mean: float = 0.03,
    dzri_sd: float = 0.04,
) -> TrueParams:
    """A randomized but well-behaved generating design: rent effects drawn from
    their hierarchical prior, rates comfortably above the identifiability
    floor, and rent changes of realistic magnitude."""
    spec = spec or PriorSpec()
    phi = sample_truncated_normal(
        np.full(n_metros, spec.m_phi_bar), np.sqrt(spec.sigma2_phi_i), 0.0, rng
    )
    nu = rng.normal(0.002, np.sqrt(spec.sigma2_nu_i) / 2.0, size=n_metros)
    log_pop = rng.uniform(np.log(population_range[0]), np.log(population_range[1]), size=n_metros)
    return TrueParams(
        phi=np.asarray(phi),
        nu=nu,
        baseline_population=np.exp(log_pop).astype(np.int64),
        baseline_rate=rng.uniform(*rate_range, size=n_metros),
        sheltered_share=rng.uniform(0.3, 0.9, size=n_metros),
        zri0=rng.uniform(1100.0, 2600.0, size=n_metros),
        dzri=rng.normal(dzri_mean, dzri_sd, size=(n_metros, T)),
    )


def generate_panel(
    prior_spec: PriorSpec,
    true_params: TrueParams,
    T: int,
    n_metros: int,
    rng,
    scenario: AccuracyScenario | None = None,
    start_year: int = 2010,
) -> tuple[Panel, GroundTruth]:
    """Ancestral sampling of the generative model over a baseline year plus T
    modeled years.

    Count accuracies are drawn from the beta implied by each metro's baseline
    sheltered share under a constant-mean scenario (other scenarios only alter
    the means).  Metros whose realized homelessness rate drops below
    RATE_FLOOR are flagged and a warning is emitted.
    """
    p = true_params
    if len(p.phi) != n_metros or p.dzri.shape[1] != T:
        raise ValueError("true_params shape does not match n_metros / T")
    scenario = scenario or AccuracyScenario(kind="constant")

    eta = np.empty((n_metros, T + 1))
    psi = np.empty((n_metros, T + 1))
    theta = np.empty((n_metros, T + 1))
    N = np.empty((n_metros, T + 1), dtype=np.int64)
    H = np.empty((n_metros, T + 1), dtype=np.int64)
    C = np.empty((n_metros, T + 1), dtype=np.int64)
    pi = np.empty((n_metros, T + 1))
    lambda_bar = prior_spec.lambda_scale * p.baseline_population.astype(float)

    eta[:, 0] = rng.normal(prior_spec.mean_eta0, np.sqrt(prior_spec.var_eta0), size=n_metros)
    psi[:, 0] = np.log(p.baseline_rate / (1.0 - p.baseline_rate)) + rng.normal(
        0.0, np.sqrt(prior_spec.sigma2_psi0), size=n_metros
    )
    for t in range(1, T + 1):
        eta[:, t] = eta[:, t - 1] + p.nu + rng.normal(0, np.sqrt(prior_spec.sigma2_eta), n_metros)
        psi[:, t] = (
            psi[:, t - 1]
            + p.phi * p.dzri[:, t - 1]
            + rng.normal(0, np.sqrt(prior_spec.sigma2_psi), n_metros)
        )
    theta[:] = expit(eta)
    rates = expit(psi)

    for t in range(T + 1):
        N[:, t] = rng.poisson(lambda_bar * theta[:, t])
        H[:, t] = rng.binomial(N[:, t], rates[:, t])

    # accuracy betas anchored at each metro's baseline sheltered share, means
    # following the requested trajectory
    for i in range(n_metros):
        pi0 = baseline_accuracy_mean(
            p.sheltered_share[i], 1.0 - p.sheltered_share[i], prior_spec.unsheltered_accuracy
        )
        delta_i = 0.0
        if scenario.kind == "linear":
            delta_i = unsheltered_delta(
                scenario.delta_bar, p.sheltered_share[i], 1.0, prior_spec.delta_basis
            )
        traj = accuracy_trajectory(
            scenario,
            pi0,
            T,
            delta_i=delta_i,
            var_pi=prior_spec.var_pi,
            mean_cap=prior_spec.accuracy_mean_cap,
        )
        pi[i, :] = rng.beta(traj.a, traj.b)
    C[:] = rng.binomial(H, pi)

    below_floor = (rates[:, 1:].min(axis=1) < RATE_FLOOR)
    if np.any(below_floor):
        warnings.warn(
            f"{int(below_floor.sum())} metro(s) fell below the homelessness-rate "
            f"identifiability floor of {RATE_FLOOR:.2%}",
            stacklevel=2,
        )

    years = np.arange(start_year, start_year + T + 1)
    zri = np.empty((n_metros, T + 1))
    zri[:, 0] = p.zri0
    for t in range(1, T + 1):
        zri[:, t] = zri[:, t - 1] * (1.0 + p.dzri[:, t - 1])

    metros = []
    for i in range(n_metros):
        sheltered0 = int(round(p.sheltered_share[i] * C[i, 0]))
        metros.append(
            MetroSeries(
                metro_id=f"metro_{i:02d}",
                years=years,
                count_total=C[i],
                count_sheltered0=sheltered0,
                count_unsheltered0=int(C[i, 0]) - sheltered0,
                population=N[i],
                zri=zri[i],
            )
        )
    truth = GroundTruth(
        phi=p.phi.copy(),
        nu=p.nu.copy(),
        eta=eta,
        psi=psi,
        H=H,
        pi=pi,
        theta=theta,
        lambda_bar=lambda_bar,
        below_floor=below_floor,
    )
    return Panel(metros=tuple(metros)), truth


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def betabinomial_pmf(C, H, a: float, b: float):
    """Beta-binomial mass P(C | H, a, b), evaluated in log space."""
    C = np.asarray(C)
    H = np.asarray(H)
    if np.any(C < 0) or np.any(C > H):
        raise ValueError("need 0 <= C <= H")
    log_pmf = (
        gammaln(H + 1)
        - gammaln(C + 1)
        - gammaln(H - C + 1)
        + gammaln(C + a)
        + gammaln(H - C + b)
        - gammaln(H + a + b)
        - (gammaln(a) + gammaln(b) - gammaln(a + b))
    )
    out = np.exp(log_pmf)
    return float(out) if out.ndim == 0 else out


def brute_force_H_pmf(N: int, C: int, p: float, a: float, b: float) -> np.ndarray:
    """Normalized distribution of the total subpopulation size on [C, N] by
    direct log-space evaluation over the full support.

    Combines the count thinning Beta-binomial(C | H, a, b) with the
    Binomial(H | N, p) population term.  Oracle-scale only (N <= 5000).
    """
    if N > 5000:
        raise ValueError("brute-force oracle is restricted to N <= 5000")
    if not 0 <= C <= N:
        raise ValueError("need 0 <= C <= N")
    if not 0.0 < p < 1.0:
        raise ValueError("need p in (0, 1)")
    H = np.arange(C, N + 1)
    log_thin = (
        gammaln(H + 1)
        - gammaln(C + 1)
        - gammaln(H - C + 1)
        + gammaln(C + a)
        + gammaln(H - C + b)
        - gammaln(H + a + b)
    )
    log_bin = (
        gammaln(N + 1)
        - gammaln(H + 1)
        - gammaln(N - H + 1)
        + H * np.log(p)
        + (N - H) * np.log1p(-p)
    )
    log_pmf = log_thin + log_bin
    log_pmf -= log_pmf.max()
    pmf = np.exp(log_pmf)
    return pmf / pmf.sum()


def smoothed_moments_dense(problem: FfbsProblem) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and covariance of a drifting-random-walk state given
    precision-weighted observations, by dense multivariate-normal
    conditioning.  Independent O(T^3) cross-check of the sequential sampler.
    """
    T = problem.T
    # prior over x_{1:T}: mean accumulates the drift; covariance is that of a
    # random walk started from the x_0 prior
    mu = problem.prior_mean + np.cumsum(problem.drift)
    idx = np.arange(1, T + 1)
    cov = problem.prior_var + problem.innovation_var * np.minimum.outer(idx, idx)
    prec_prior = np.linalg.inv(cov)
    prec_post = prec_prior + np.diag(problem.precision)
    cov_post = np.linalg.inv(prec_post)
    mean_post = cov_post @ (prec_prior @ mu + problem.kappa)
    return mean_post, cov_post
