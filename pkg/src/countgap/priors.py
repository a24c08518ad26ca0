"""Prior elicitation: count-accuracy trajectories, beta moment matching,
rent-effect prior mean calibration, population-process anchors, and the
baseline log-odds prior for the homeless subpopulation.

All scalar hyperparameters live in :class:`PriorSpec` with their elicited
defaults; every one can be overridden via configuration.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, fields, replace

import numpy as np

__all__ = [
    "PriorError",
    "PriorSpec",
    "AccuracyScenario",
    "AccuracyPrior",
    "baseline_accuracy_mean",
    "beta_params",
    "unsheltered_delta",
    "accuracy_trajectory",
    "calibrate_phi_mean",
    "psi0_prior",
    "eta0_lambda_setup",
    "build_accuracy_priors",
]


class PriorError(ValueError):
    """Raised when a prior cannot be formed from the given quantities."""


@dataclass(frozen=True)
class PriorSpec:
    """Fixed hyperparameters of the hierarchical model.

    Variances control, in order: the log-odds-of-homelessness innovation, its
    baseline-year prior, the population log-odds innovation and baseline
    prior, the count-accuracy beta priors, the rent-effect hierarchy (global
    and per-metro), and the population-drift hierarchy (per-metro and
    global).
    """

    sigma2_psi: float = 0.001
    sigma2_psi0: float = 0.01
    sigma2_eta: float = 0.0001
    var_eta0: float = 0.0001
    mean_eta0: float = 0.0
    var_pi: float = 0.0005
    sigma2_phi_bar: float = 0.005
    sigma2_phi_i: float = 0.05
    m_phi_bar: float = 0.94
    sigma2_nu_i: float = 0.01
    sigma2_nu_bar: float = 0.005
    lambda_scale: float = 2.0            # population-rate scale factor: lambda_bar = scale * N0
    unsheltered_accuracy: float = 0.6    # prior count probability for an unsheltered person
    delta_basis: str = "sheltered"       # which baseline share scales annual accuracy gains
    accuracy_mean_cap: float = 1.0 - 1e-4
    psi0_variance: float = 0.01
    psi0_mc_draws: int = 100_000
    psi0_mc_seed: int = 0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name.startswith(("sigma2", "var")) and value <= 0:
                raise PriorError(f"{f.name} must be strictly positive, got {value}")
        if self.delta_basis not in ("sheltered", "unsheltered"):
            raise PriorError(f"delta_basis must be sheltered or unsheltered, got {self.delta_basis!r}")
        if not 0 < self.accuracy_mean_cap < 1:
            raise PriorError("accuracy_mean_cap must lie in (0, 1)")

    def override(self, **kwargs) -> "PriorSpec":
        return replace(self, **kwargs)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class AccuracyScenario:
    """Assumed trajectory of expected count accuracy over the modeled years.

    kind ``constant`` repeats the baseline accuracy; ``linear`` adds a fixed
    per-year gain (derived from ``delta_bar`` and the metro's baseline
    sheltered share) capped at 1; ``step`` jumps by ``step_size`` from year
    ``tau`` on.
    """

    kind: str = "constant"
    delta_bar: float = 0.0
    tau: int | None = None
    step_size: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "linear", "step"):
            raise PriorError(f"unknown accuracy scenario kind: {self.kind!r}")
        if self.kind == "linear" and self.delta_bar < 0:
            raise PriorError("linear scenario requires delta_bar >= 0")
        if self.kind == "step" and self.tau is None:
            raise PriorError("step scenario requires tau")


@dataclass(frozen=True)
class AccuracyPrior:
    """Beta count-accuracy priors for one metro, baseline year at index 0."""

    mean: np.ndarray
    var: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        for arr in (self.mean, self.var, self.a, self.b):
            if len(arr) != len(self.mean):
                raise PriorError("accuracy prior arrays must share one length")
        if np.any(self.mean - 2.0 * np.sqrt(self.var) <= 0):
            raise PriorError("accuracy prior puts mass at or below zero (mean - 2 sd <= 0)")

    @property
    def n_years(self) -> int:
        return len(self.mean) - 1

    def row(self, t: int) -> tuple[float, float]:
        """(a, b) for year index t (0 = baseline)."""
        return float(self.a[t]), float(self.b[t])


def baseline_accuracy_mean(
    sheltered_count: int, unsheltered_count: int, unsheltered_accuracy: float = 0.6
) -> float:
    """Baseline expected count accuracy: a count-share-weighted average of
    sheltered accuracy (1.0) and unsheltered accuracy (0.6 by default)."""
    total = sheltered_count + unsheltered_count
    if total <= 0:
        raise PriorError("baseline count is zero; cannot form an accuracy prior")
    if sheltered_count < 0 or unsheltered_count < 0:
        raise PriorError("negative sheltered/unsheltered count")
    return 1.0 * (sheltered_count / total) + unsheltered_accuracy * (unsheltered_count / total)


def beta_params(mean: float, variance: float) -> tuple[float, float]:
    """Match a Beta(a, b) to a given mean and variance.

    Uses the reduced form a = m(m(1-m)/v - 1), b = (1-m)(m(1-m)/v - 1); the
    expanded b expression (v/m^2)(a^2/m + a) is algebraically identical and a
    unit test certifies the equivalence.
    """
    if not 0.0 < mean < 1.0:
        raise PriorError(f"beta mean must lie in (0, 1), got {mean}")
    if variance <= 0.0:
        raise PriorError(f"beta variance must be positive, got {variance}")
    if variance >= mean * (1.0 - mean):
        raise PriorError(
            f"no beta distribution has mean {mean} and variance {variance} "
            f"(requires variance < {mean * (1.0 - mean)})"
        )
    k = mean * (1.0 - mean) / variance - 1.0
    return mean * k, (1.0 - mean) * k


def unsheltered_delta(
    delta_bar: float, sheltered_count: int, total_count: int, basis: str = "sheltered"
) -> float:
    """Per-metro annual accuracy gain implied by a gain of ``delta_bar`` in the
    unsheltered count accuracy.

    ``basis`` selects the baseline share multiplying ``delta_bar``.  The
    default scales by the sheltered share; ``unsheltered`` scales by the
    unsheltered share, which is the arithmetically consistent choice when the
    gain applies only to the unsheltered count (a perfectly-counted sheltered
    population contributes no improvement).  Both conventions are exposed;
    neither is second-guessed here.
    """
    if total_count <= 0:
        raise PriorError("total baseline count must be positive")
    share = sheltered_count / total_count
    if basis == "unsheltered":
        share = 1.0 - share
    elif basis != "sheltered":
        raise PriorError(f"basis must be sheltered or unsheltered, got {basis!r}")
    return delta_bar * share


def _shrink_to_valid_beta(mean: float, var: float, mean_cap: float) -> tuple[float, float, bool]:
    # keep mean + 2 sd strictly below 1 (and variance below m(1-m)) so a beta exists
    shrunk = False
    if mean > mean_cap:
        mean = mean_cap
        shrunk = True
    limit = min(((1.0 - mean) / 2.0) ** 2, mean * (1.0 - mean))
    if var >= limit:
        var = limit * 0.9025  # sd shrunk to 0.95 of the boundary value
        shrunk = True
    return mean, var, shrunk


def accuracy_trajectory(
    scenario: AccuracyScenario,
    pi0_mean: float,
    T: int,
    *,
    delta_i: float = 0.0,
    var_pi: float = 0.0005,
    mean_cap: float = 1.0 - 1e-4,
) -> AccuracyPrior:
    """Per-year beta accuracy priors for one metro, baseline year included.

    Expected accuracies follow the scenario: constant at ``pi0_mean``; linear
    gains of ``delta_i`` per year from the first modeled year onward, capped
    at 1; or a step of ``scenario.step_size`` from year ``scenario.tau`` on.
    The variance is held at ``var_pi`` throughout.  Whenever a capped mean
    leaves no room for the requested variance (mean + 2 sd would reach 1) the
    variance is shrunk to fit and a warning is emitted.
    """
    if not 0.0 < pi0_mean <= 1.0:
        raise PriorError(f"baseline accuracy mean must lie in (0, 1], got {pi0_mean}")
    if T < 1:
        raise PriorError("need at least one modeled year")
    if scenario.kind == "step" and not 1 <= scenario.tau <= T:
        raise PriorError(f"step year tau={scenario.tau} outside modeled years 1..{T}")

    means = np.empty(T + 1)
    means[0] = pi0_mean
    if scenario.kind == "constant":
        means[1:] = pi0_mean
    elif scenario.kind == "linear":
        means[1] = pi0_mean
        for t in range(2, T + 1):
            means[t] = min(means[t - 1] + delta_i, 1.0)
    else:  # step
        for t in range(1, T + 1):
            means[t] = min(pi0_mean + (scenario.step_size if t >= scenario.tau else 0.0), 1.0)

    adj_mean = np.empty(T + 1)
    adj_var = np.empty(T + 1)
    a = np.empty(T + 1)
    b = np.empty(T + 1)
    shrunk_years = []
    for t in range(T + 1):
        m, v, shrunk = _shrink_to_valid_beta(float(means[t]), var_pi, mean_cap)
        if shrunk:
            shrunk_years.append(t)
        adj_mean[t], adj_var[t] = m, v
        a[t], b[t] = beta_params(m, v)
    if shrunk_years:
        warnings.warn(
            f"accuracy prior variance shrunk to fit a valid beta in year(s) {shrunk_years} "
            f"(mean near 1)",
            stacklevel=2,
        )
    return AccuracyPrior(mean=adj_mean, var=adj_var, a=a, b=b)


def calibrate_phi_mean(
    f0_bar: float,
    zri_fraction: float,
    target_ratio: float,
    method: str = "odds",
    tol: float = 1e-10,
) -> float:
    """Solve for the prior mean rent effect m such that a rent-index increase
    of ``zri_fraction`` raises homelessness by ``target_ratio``.

    ``method="odds"`` matches the target on the odds scale,
    exp(zri_fraction * m) = target_ratio, which for baseline rates as small as
    logistic(f0_bar) is indistinguishable from the rate ratio and reproduces
    the shipped default prior mean of 0.94.  ``method="rate"`` solves the
    exact rate-ratio equation
    (1 + exp(-f0_bar)) / (1 + exp(-f0_bar - zri_fraction * m)) = target_ratio,
    which sits slightly higher (0.947 for the default inputs).  Both are
    solved by bisection to |residual| < ``tol``.
    """
    if target_ratio < 1.0:
        raise PriorError(f"target_ratio must be >= 1, got {target_ratio}")
    if zri_fraction <= 0:
        raise PriorError(f"zri_fraction must be positive, got {zri_fraction}")
    if method == "odds":
        def residual(m):
            return math.exp(zri_fraction * m) - target_ratio
    elif method == "rate":
        def residual(m):
            return (1.0 + math.exp(-f0_bar)) / (
                1.0 + math.exp(-f0_bar - zri_fraction * m)
            ) - target_ratio
    else:
        raise PriorError(f"method must be odds or rate, got {method!r}")

    lo, hi = 0.0, 1.0
    r_lo = residual(lo)
    if r_lo > 0:
        raise PriorError("no sign change on the bracket: residual positive at m = 0")
    while residual(hi) < 0:
        hi *= 2.0
        if hi > 1e12:
            raise PriorError("no sign change on the bracket: target unreachable")
    while True:
        mid = 0.5 * (lo + hi)
        r = residual(mid)
        if abs(r) < tol:
            return mid
        if r < 0:
            lo = mid
        else:
            hi = mid


def psi0_prior(
    C0: int,
    N0: int,
    accuracy_row: tuple[float, float],
    mc_draws: int = 100_000,
    seed: int = 0,
    variance: float = 0.01,
) -> tuple[float, float]:
    """Prior mean and variance for the baseline log odds of homelessness.

    The expected total homeless population is approximated as an expected
    inflation of the observed baseline count, E[1/pi] * C0, with E[1/pi]
    estimated by Monte Carlo over the baseline accuracy beta (fixed seed for
    reproducibility).  The mean is the logit of the implied baseline rate.
    """
    if C0 < 0 or N0 <= 0:
        raise PriorError("need C0 >= 0 and N0 > 0")
    a0, b0 = accuracy_row
    rng = np.random.default_rng(seed)
    inv_pi = float(np.mean(1.0 / rng.beta(a0, b0, size=mc_draws)))
    inflated = inv_pi * C0 / N0
    if inflated >= 1.0:
        raise PriorError(
            f"expected inflated count {inv_pi * C0:.0f} reaches the total population {N0}"
        )
    mean = math.log(inflated / (1.0 - inflated))
    return mean, variance


def eta0_lambda_setup(N0: int, lambda_scale: float = 2.0) -> tuple[float, float, float]:
    """Population-process anchors from the baseline census population: the
    Poisson scale factor lambda_bar = lambda_scale * N0 together with the
    baseline log-odds prior mean 0 and variance 1e-4 (so the expected
    baseline rate is the observed population)."""
    if N0 <= 0:
        raise PriorError("baseline population must be positive")
    return lambda_scale * N0, 0.0, 0.0001


def build_accuracy_priors(panel, spec: PriorSpec, scenario: AccuracyScenario) -> dict[str, AccuracyPrior]:
    """Assemble per-metro accuracy priors from baseline splits and a scenario."""
    priors = {}
    for m in panel.metros:
        pi0 = baseline_accuracy_mean(
            m.count_sheltered0, m.count_unsheltered0, spec.unsheltered_accuracy
        )
        delta_i = 0.0
        if scenario.kind == "linear":
            delta_i = unsheltered_delta(
                scenario.delta_bar, m.count_sheltered0, int(m.count_total[0]), spec.delta_basis
            )
        priors[m.metro_id] = accuracy_trajectory(
            scenario,
            pi0,
            m.n_years,
            delta_i=delta_i,
            var_pi=spec.var_pi,
            mean_cap=spec.accuracy_mean_cap,
        )
    return priors
