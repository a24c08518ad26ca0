"""Ten-step blocked Gibbs sampler for the joint population / subpopulation
count model.

Each sweep updates, in order: (1) the auxiliary Poisson totals behind the
census counts; (2) the population log-odds paths by FFBS; (3) their
Pólya-Gamma precisions; (4) per-metro population drifts and (5) their global
mean; (6) the homelessness log-odds paths by FFBS; (7) their Pólya-Gamma
precisions; (8) per-metro rent effects (truncated at zero) and (9) their
global mean (truncated at zero); (10) the latent total homeless counts from
their discrete full conditional on [C, N].

Auxiliary variables (steps 1, 3, 7) are integrated out numerically: they are
never retained in the output draws.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np
from numba import njit
from scipy.special import expit

from .ffbs import FfbsError
from .panel import Panel, delta_zri
from .polya_gamma import sample_pg
from .priors import AccuracyPrior, PriorSpec, psi0_prior
from .truncnorm import sample_truncated_normal

__all__ = [
    "GibbsError",
    "GibbsConfig",
    "ChainState",
    "PosteriorDraws",
    "sample_Z",
    "sample_eta",
    "sample_omega",
    "sample_zeta",
    "sample_nu_i",
    "sample_nu_bar",
    "sample_psi",
    "sample_phi_i",
    "sample_phi_bar",
    "sample_H",
    "run_chain",
    "run_chains",
]

_METRO_STEPS = ("Z", "eta", "omega", "nu", "psi", "zeta", "phi", "H")


def _settings_hash(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()


class GibbsError(RuntimeError):
    """Raised when the sampler is misconfigured or an invariant breaks mid-chain."""


@dataclass(frozen=True)
class GibbsConfig:
    burn_in: int = 15_000
    n_samples: int = 25_000
    n_chains: int = 1
    seed: int = 0
    thinning: int = 1
    tail_threshold: float = 1e-8     # right-tail cutoff of the step-10 support scan
    h_sampler_mode: str = "betabinomial"  # or "pi_draw": condition on a fresh accuracy draw
    parallelism: str = "none"        # "none" | "chains" (used by the CLI dispatcher)

    def __post_init__(self):
        if self.burn_in < 0 or self.n_samples < 1:
            raise GibbsError("need burn_in >= 0 and n_samples >= 1")
        if self.thinning < 1:
            raise GibbsError("thinning must be >= 1")
        if self.n_chains < 1:
            raise GibbsError("n_chains must be >= 1")
        if not 0 < self.tail_threshold < 1:
            raise GibbsError("tail_threshold must lie in (0, 1)")
        if self.h_sampler_mode not in ("betabinomial", "pi_draw"):
            raise GibbsError(f"unknown h_sampler_mode: {self.h_sampler_mode!r}")
        if self.parallelism not in ("none", "chains"):
            raise GibbsError(f"unknown parallelism mode: {self.parallelism!r}")

    def override(self, **kwargs) -> "GibbsConfig":
        return replace(self, **kwargs)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class ChainState:
    """Latent state of one Gibbs iteration (metros by modeled years)."""

    Z: np.ndarray       # auxiliary Poisson totals, >= N
    omega: np.ndarray   # PG precisions for the population logits
    zeta: np.ndarray    # PG precisions for the homelessness logits
    eta: np.ndarray     # population log odds
    psi: np.ndarray     # homelessness log odds
    H: np.ndarray       # latent total homeless, C <= H <= N
    nu: np.ndarray      # per-metro population drift
    phi: np.ndarray     # per-metro rent effect, > 0
    nu_bar: float
    phi_bar: float


@dataclass
class PosteriorDraws:
    """Retained post-burn-in draws of one chain (auxiliaries discarded)."""

    metro_ids: list[str]
    years: np.ndarray            # modeled years
    eta: np.ndarray              # (n_draws, n_metros, T)
    psi: np.ndarray
    H: np.ndarray                # int64
    nu: np.ndarray               # (n_draws, n_metros)
    phi: np.ndarray
    nu_bar: np.ndarray           # (n_draws,)
    phi_bar: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n_draws(self) -> int:
        return self.eta.shape[0]

    @property
    def n_metros(self) -> int:
        return self.eta.shape[1]

    @property
    def n_years(self) -> int:
        return self.eta.shape[2]

    @classmethod
    def concat(cls, chains: list["PosteriorDraws"]) -> "PosteriorDraws":
        """Pool several chains' draws along the draw axis."""
        first = chains[0]
        for other in chains[1:]:
            if other.metro_ids != first.metro_ids or not np.array_equal(other.years, first.years):
                raise GibbsError("cannot pool draws over different panels")
        return cls(
            metro_ids=first.metro_ids,
            years=first.years,
            eta=np.concatenate([c.eta for c in chains]),
            psi=np.concatenate([c.psi for c in chains]),
            H=np.concatenate([c.H for c in chains]),
            nu=np.concatenate([c.nu for c in chains]),
            phi=np.concatenate([c.phi for c in chains]),
            nu_bar=np.concatenate([c.nu_bar for c in chains]),
            phi_bar=np.concatenate([c.phi_bar for c in chains]),
            meta={"pooled_from": [c.meta for c in chains]},
        )


# ---------------------------------------------------------------------------
# individual sampling steps (conjugate full conditionals)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _ffbs_path_kernel(m0, S0, omega, kappa, drift, sig2, normals, out):
    # forward filter then backward draw; returns -1 or the 1-based time of the
    # first nonfinite filtered moment
    T = omega.shape[0]
    m = np.empty(T)
    S = np.empty(T)
    prev_m, prev_S = m0, S0
    for t in range(T):
        R = prev_S + sig2
        a = prev_m + drift[t]
        S[t] = 1.0 / (omega[t] + 1.0 / R)
        m[t] = S[t] * (kappa[t] + a / R)
        if not (np.isfinite(m[t]) and np.isfinite(S[t]) and S[t] > 0.0):
            return t + 1
        prev_m, prev_S = m[t], S[t]
    out[T - 1] = m[T - 1] + math.sqrt(S[T - 1]) * normals[T - 1]
    for t in range(T - 2, -1, -1):
        St = 1.0 / (1.0 / S[t] + 1.0 / sig2)
        mt = St * (m[t] / S[t] + (out[t + 1] - drift[t + 1]) / sig2)
        out[t] = mt + math.sqrt(St) * normals[t]
    return -1


def _ffbs_draw(m0, S0, omega, kappa, drift, sig2, rng):
    # lean equivalent of filter_forward + sample_backward for the sweep loop
    out = np.empty(len(omega))
    status = _ffbs_path_kernel(
        m0, S0, omega, kappa, drift, sig2, rng.standard_normal(len(omega)), out
    )
    if status != -1:
        raise FfbsError(f"nonfinite filtered moments at t={status}")
    return out


def sample_Z(N, lambda_bar, theta, rng):
    """Auxiliary total behind a thinned Poisson count: Z = N + j with
    j ~ Poisson((1 - theta) lambda_bar)."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0) or np.any(theta >= 1):
        raise GibbsError("theta must lie strictly inside (0, 1)")
    return np.asarray(N) + rng.poisson((1.0 - theta) * np.asarray(lambda_bar, dtype=float))


def sample_omega(Z, eta, rng):
    """PG precisions for the population logits: PG(Z, eta) element-wise."""
    return sample_pg(Z, eta, rng)


def sample_zeta(N, psi, rng):
    """PG precisions for the homelessness logits: PG(N, psi) element-wise."""
    return sample_pg(N, psi, rng)


def sample_eta(N, Z, omega, nu_i, prior_mean, prior_var, sigma2_eta, rng):
    """FFBS draw of one metro's population log-odds path."""
    N = np.asarray(N, dtype=float)
    Z = np.asarray(Z, dtype=float)
    return _ffbs_draw(
        float(prior_mean), float(prior_var),
        np.asarray(omega, dtype=float), N - 0.5 * Z,
        np.full(len(N), float(nu_i)), float(sigma2_eta), rng,
    )


def sample_psi(N, H, zeta, phi_i, dzri, psi0_mean, sigma2_psi0, sigma2_psi, rng):
    """FFBS draw of one metro's homelessness log-odds path.

    The baseline-year prior variance enters the first filtering step, so the
    first increment is effectively measured against sigma2_psi0 + sigma2_psi.
    """
    N = np.asarray(N, dtype=float)
    H = np.asarray(H, dtype=float)
    return _ffbs_draw(
        float(psi0_mean), float(sigma2_psi0),
        np.asarray(zeta, dtype=float), H - 0.5 * N,
        float(phi_i) * np.asarray(dzri, dtype=float), float(sigma2_psi), rng,
    )


def sample_nu_i(eta, nu_bar, prior_mean_eta0, var_eta0, sigma2_eta, sigma2_nu_i, rng):
    """Conjugate draw of a metro's population drift.

    Evidence: the first log-odds value against the (marginalized) baseline
    prior, with variance var_eta0 + sigma2_eta, plus the T-1 increments.
    """
    eta = np.asarray(eta, dtype=float)
    T = len(eta)
    first_var = var_eta0 + sigma2_eta
    prec = 1.0 / first_var + (T - 1) / sigma2_eta + 1.0 / sigma2_nu_i
    var = 1.0 / prec
    mean = var * (
        (eta[0] - prior_mean_eta0) / first_var
        + (eta[-1] - eta[0]) / sigma2_eta
        + nu_bar / sigma2_nu_i
    )
    return rng.normal(mean, math.sqrt(var))


def sample_nu_bar(nu, sigma2_nu_i, sigma2_nu_bar, rng):
    """Conjugate draw of the global population drift (zero-mean prior)."""
    nu = np.asarray(nu, dtype=float)
    var = 1.0 / (len(nu) / sigma2_nu_i + 1.0 / sigma2_nu_bar)
    mean = var * nu.sum() / sigma2_nu_i
    return rng.normal(mean, math.sqrt(var))


def sample_phi_i(psi, psi0_mean, dzri, phi_bar, sigma2_psi0, sigma2_psi, sigma2_phi_i, rng):
    """Truncated-at-zero conjugate draw of a metro's rent effect.

    Regression of log-odds increments on rent changes: the first increment is
    measured against the baseline prior mean with variance
    sigma2_psi0 + sigma2_psi, later increments against sigma2_psi.
    """
    psi = np.asarray(psi, dtype=float)
    dzri = np.asarray(dzri, dtype=float)
    first_var = sigma2_psi0 + sigma2_psi
    prec = dzri[0] ** 2 / first_var + np.sum(dzri[1:] ** 2) / sigma2_psi + 1.0 / sigma2_phi_i
    var = 1.0 / prec
    mean = var * (
        phi_bar / sigma2_phi_i
        + dzri[0] * (psi[0] - psi0_mean) / first_var
        + np.sum(dzri[1:] * np.diff(psi)) / sigma2_psi
    )
    return sample_truncated_normal(mean, math.sqrt(var), 0.0, rng)


def sample_phi_bar(phi, m_phi_bar, sigma2_phi_i, sigma2_phi_bar, rng):
    """Truncated-at-zero conjugate draw of the global rent effect."""
    phi = np.asarray(phi, dtype=float)
    var = 1.0 / (len(phi) / sigma2_phi_i + 1.0 / sigma2_phi_bar)
    mean = var * (phi.sum() / sigma2_phi_i + m_phi_bar / sigma2_phi_bar)
    return sample_truncated_normal(mean, math.sqrt(var), 0.0, rng)


# ---------------------------------------------------------------------------
# step 10: latent total homeless count
# ---------------------------------------------------------------------------

@njit(cache=True)
def _h_draw_kernel(N, C, odds, a, b, one_minus_pi, use_marginal, tail, u):
    """One inverse-CDF draw from the latent-count conditional on [C, N].

    Two passes over the successive-ratio recurrence in linear space with
    periodic rescaling (the products span hundreds of orders of magnitude):
    the first accumulates the truncated total mass, the second replays the
    identical trajectory until the cumulative crosses u * total.  Scan stops
    once the running value drops below ``tail`` times the largest seen.
    """
    if C == N:
        return C
    RESCALE = 1e250
    p = 1.0
    total = 1.0
    maxp = 1.0
    n_rescale = 0
    K = 0
    H = float(C)
    while H < N:
        if use_marginal:
            r = ((N - H) / (H + 1.0 - C)) * ((H - C + b) / (H + a + b)) * odds
        else:
            r = ((N - H) / (H + 1.0 - C)) * one_minus_pi * odds
        p *= r
        total += p
        K += 1
        H += 1.0
        if p > maxp:
            maxp = p
        if p < tail * maxp:
            break
        if maxp > RESCALE:
            p /= RESCALE
            total /= RESCALE
            maxp /= RESCALE
            n_rescale += 1

    target = u * total
    # replay; cumulative and target share a scale only once the same rescale
    # events have been applied (before that the cumulative is astronomically
    # below any reachable target)
    k_left = n_rescale
    p = 1.0
    cum = 1.0
    maxp = 1.0
    if k_left == 0 and cum >= target:
        return C
    H = float(C)
    for _ in range(K):
        if use_marginal:
            r = ((N - H) / (H + 1.0 - C)) * ((H - C + b) / (H + a + b)) * odds
        else:
            r = ((N - H) / (H + 1.0 - C)) * one_minus_pi * odds
        p *= r
        cum += p
        H += 1.0
        if p > maxp:
            maxp = p
        if k_left == 0 and cum >= target:
            return int(H)
        if p < tail * maxp:
            break
        if maxp > RESCALE:
            p /= RESCALE
            cum /= RESCALE
            maxp /= RESCALE
            k_left -= 1
    return int(H)


def _h_pmf_table(N, C, log_odds, a, b, log1m_pi, tail_threshold, block=1024):
    """Normalized pmf of H on its truncated support [C, C + K].

    Evaluated through the successive-ratio recurrence in log space, scanning
    upward from C and stopping once the running value falls below
    tail_threshold times the largest value seen (right-tail truncation only;
    the full left side from C is kept).
    """
    if C == N:
        return np.array([1.0])
    log_tail = math.log(tail_threshold)
    segments = [np.zeros(1)]
    best = 0.0
    last = 0.0
    start = C
    while start < N:
        stop = min(start + block, N)
        block = min(block * 2, 65536)  # grow the scan window geometrically
        Hs = np.arange(start, stop, dtype=np.float64)
        log_r = np.log(N - Hs) - np.log(Hs + 1.0 - C) + log_odds
        if log1m_pi is None:
            log_r += np.log(Hs - C + b) - np.log(Hs + a + b)
        else:
            log_r += log1m_pi
        seg = last + np.cumsum(log_r)
        segments.append(seg)
        best = max(best, float(seg.max()))
        last = float(seg[-1])
        if last < best + log_tail or not math.isfinite(last):
            break
        start = stop
    logp = np.concatenate(segments)
    above = np.flatnonzero(logp >= best + log_tail)
    logp = logp[: above[-1] + 1]  # trim the scanned-past right tail
    pmf = np.exp(logp - best)
    return pmf / pmf.sum()


def sample_H(
    N, C, p, accuracy_beta, tail_threshold, rng,
    mode="betabinomial", h_current=None, size=None,
):
    """Draw the latent total homeless count from its full conditional on [C, N].

    The default marginalizes the count accuracy, combining the beta-binomial
    thinning of C with the binomial population term at rate ``p``.  Mode
    ``pi_draw`` keeps the accuracy in the state: it draws
    pi ~ Beta(a + C, b + H - C) from its own full conditional given
    ``h_current`` and then H from the pi-conditional kernel.  That two-block
    update targets the same H marginal as the marginalized kernel (drawing pi
    from the bare prior would not: the pi-conditional kernel's normalizer
    varies with pi and visibly biases H upward).

    With ``size``, the marginalized mode returns i.i.d. draws from one table;
    the pi mode runs its two-block chain (burn-in 50, thinning 5) and returns
    ``size`` nearly independent states.
    """
    N, C = int(N), int(C)
    if C > N:
        raise GibbsError(f"count {C} exceeds population {N}")
    if C < 0:
        raise GibbsError("count must be nonnegative")
    if not 0.0 < p < 1.0:
        raise GibbsError(f"rate p must lie strictly inside (0, 1), got {p}")
    a, b = accuracy_beta
    odds = p / (1.0 - p)

    if mode == "betabinomial":
        if size is None:
            return _h_draw_kernel(N, C, odds, a, b, 0.0, True, tail_threshold, rng.random())
        # batch draws reuse one table (the numpy log-space reference path)
        pmf = _h_pmf_table(N, C, math.log(odds), a, b, None, tail_threshold)
        cum = np.cumsum(pmf)
        idx = np.searchsorted(cum, rng.random(size) * cum[-1], side="right")
        return (C + np.minimum(idx, len(pmf) - 1)).astype(np.int64)
    if mode != "pi_draw":
        raise GibbsError(f"unknown H sampler mode: {mode!r}")

    def _step(h_prev):
        pi = rng.beta(a + C, b + (h_prev - C))
        return _h_draw_kernel(N, C, odds, a, b, 1.0 - pi, False, tail_threshold, rng.random())

    if size is None:
        if h_current is None:
            raise GibbsError("pi_draw mode needs the current latent count")
        return _step(int(h_current))
    h = min(N, max(C, int(round(C * (a + b - 1) / max(a - 1, 1e-9)))))
    for _ in range(50):
        h = _step(h)
    out = np.empty(size, dtype=np.int64)
    for k in range(size):
        for _ in range(5):
            h = _step(h)
        out[k] = h
    return out


# ---------------------------------------------------------------------------
# chain driver
# ---------------------------------------------------------------------------

def _chain_streams(seed, chain_index, n_metros):
    # streams keyed by (seed, chain, metro, step); each is consumed in sweep
    # order, so results do not depend on any cross-metro execution schedule
    root = np.random.SeedSequence(entropy=(int(seed), int(chain_index)))
    children = root.spawn(n_metros + 1)
    metro_streams = []
    for i in range(n_metros):
        subs = children[i].spawn(len(_METRO_STEPS))
        metro_streams.append(
            {name: np.random.default_rng(s) for name, s in zip(_METRO_STEPS, subs)}
        )
    g = children[-1].spawn(2)
    global_streams = {
        "nu_bar": np.random.default_rng(g[0]),
        "phi_bar": np.random.default_rng(g[1]),
    }
    return metro_streams, global_streams


def _expected_inverse_accuracy(a, b):
    # E[1/pi] for pi ~ Beta(a, b); needs a > 1
    a = np.asarray(a, dtype=float)
    if np.any(a <= 1.0):
        raise GibbsError("accuracy prior too diffuse: beta shape a must exceed 1")
    return (a + np.asarray(b, dtype=float) - 1.0) / (a - 1.0)


def _check_state(state: ChainState, C, N, sweep):
    if np.any(state.Z < N):
        raise GibbsError(f"sweep {sweep}: auxiliary total fell below the census count")
    if np.any(state.H < C) or np.any(state.H > N):
        raise GibbsError(f"sweep {sweep}: latent homeless count left [C, N]")
    if np.any(state.phi <= 0) or state.phi_bar <= 0:
        raise GibbsError(f"sweep {sweep}: rent effect lost positivity")
    if not (np.all(np.isfinite(state.eta)) and np.all(np.isfinite(state.psi))):
        raise GibbsError(f"sweep {sweep}: nonfinite log-odds state")


def run_chain(
    panel: Panel,
    prior_spec: PriorSpec,
    accuracy_priors: dict[str, AccuracyPrior],
    config: GibbsConfig,
    chain_index: int = 0,
) -> PosteriorDraws:
    """Run one chain: burn in, then retain ``n_samples`` sweeps (thinned).

    Initialization: log-odds paths start at their prior means, latent totals
    at the expected inflation of the observed counts (clamped to [C, N]),
    rent effects at the prior mean and drifts at zero; the auxiliary
    variables are then drawn once from their full conditionals before the
    first sweep.
    """
    n, T = panel.n_metros, panel.n_years
    spec = prior_spec
    N = np.stack([m.population[1:] for m in panel.metros]).astype(np.int64)
    C = np.stack([m.count_total[1:] for m in panel.metros]).astype(np.int64)
    N0 = np.array([m.population[0] for m in panel.metros], dtype=np.int64)
    C0 = np.array([m.count_total[0] for m in panel.metros], dtype=np.int64)
    dzri = np.stack([delta_zri(m) for m in panel.metros])

    acc = [accuracy_priors[m.metro_id] for m in panel.metros]
    for m, ap in zip(panel.metros, acc):
        if ap.n_years != T:
            raise GibbsError(f"{m.metro_id}: accuracy prior covers {ap.n_years} years, panel has {T}")
    acc_a = np.stack([ap.a for ap in acc])  # (n, T+1), baseline first
    acc_b = np.stack([ap.b for ap in acc])

    lambda_bar = spec.lambda_scale * N0.astype(float)
    psi0_mean = np.empty(n)
    for i, m in enumerate(panel.metros):
        psi0_mean[i], _ = psi0_prior(
            int(C0[i]),
            int(N0[i]),
            (acc_a[i, 0], acc_b[i, 0]),
            mc_draws=spec.psi0_mc_draws,
            seed=spec.psi0_mc_seed,
            variance=spec.psi0_variance,
        )

    metro_streams, global_streams = _chain_streams(config.seed, chain_index, n)

    # initial state
    inv_pi = _expected_inverse_accuracy(acc_a[:, 1:], acc_b[:, 1:])
    state = ChainState(
        Z=np.zeros((n, T), dtype=np.int64),
        omega=np.zeros((n, T)),
        zeta=np.zeros((n, T)),
        eta=np.full((n, T), spec.mean_eta0),
        psi=np.tile(psi0_mean[:, None], (1, T)),
        H=np.clip(np.rint(inv_pi * C).astype(np.int64), C, N),
        nu=np.zeros(n),
        phi=np.full(n, spec.m_phi_bar),
        nu_bar=0.0,
        phi_bar=spec.m_phi_bar,
    )
    # auxiliaries start from their full conditionals given the state above
    for i in range(n):
        s = metro_streams[i]
        state.Z[i] = sample_Z(N[i], lambda_bar[i], expit(state.eta[i]), s["Z"])
        state.omega[i] = sample_omega(state.Z[i], state.eta[i], s["omega"])
        state.zeta[i] = sample_zeta(N[i], state.psi[i], s["zeta"])

    n_store = config.n_samples // config.thinning
    if n_store < 1:
        raise GibbsError("n_samples // thinning must be >= 1")
    draws = PosteriorDraws(
        metro_ids=panel.metro_ids,
        years=panel.years[1:].copy(),
        eta=np.empty((n_store, n, T)),
        psi=np.empty((n_store, n, T)),
        H=np.empty((n_store, n, T), dtype=np.int64),
        nu=np.empty((n_store, n)),
        phi=np.empty((n_store, n)),
        nu_bar=np.empty(n_store),
        phi_bar=np.empty(n_store),
        meta={
            "chain_index": int(chain_index),
            "seed": int(config.seed),
            "burn_in": config.burn_in,
            "n_samples": config.n_samples,
            "thinning": config.thinning,
            "h_sampler_mode": config.h_sampler_mode,
            "config_hash": _settings_hash(config.as_dict()),
            "prior_hash": _settings_hash(spec.as_dict()),
        },
    )

    stored = 0
    total_sweeps = config.burn_in + config.n_samples
    for sweep in range(total_sweeps):
        for i in range(n):
            s = metro_streams[i]
            theta = expit(state.eta[i])
            state.Z[i] = sample_Z(N[i], lambda_bar[i], theta, s["Z"])                 # 1
            state.eta[i] = sample_eta(                                                # 2
                N[i], state.Z[i], state.omega[i], state.nu[i],
                spec.mean_eta0, spec.var_eta0, spec.sigma2_eta, s["eta"],
            )
            state.omega[i] = sample_omega(state.Z[i], state.eta[i], s["omega"])       # 3
            state.nu[i] = sample_nu_i(                                                # 4
                state.eta[i], state.nu_bar,
                spec.mean_eta0, spec.var_eta0, spec.sigma2_eta, spec.sigma2_nu_i,
                s["nu"],
            )
        state.nu_bar = sample_nu_bar(                                                 # 5
            state.nu, spec.sigma2_nu_i, spec.sigma2_nu_bar, global_streams["nu_bar"]
        )
        for i in range(n):
            s = metro_streams[i]
            state.psi[i] = sample_psi(                                                # 6
                N[i], state.H[i], state.zeta[i], state.phi[i], dzri[i],
                psi0_mean[i], spec.sigma2_psi0, spec.sigma2_psi, s["psi"],
            )
            state.zeta[i] = sample_zeta(N[i], state.psi[i], s["zeta"])                # 7
            state.phi[i] = sample_phi_i(                                              # 8
                state.psi[i], psi0_mean[i], dzri[i], state.phi_bar,
                spec.sigma2_psi0, spec.sigma2_psi, spec.sigma2_phi_i, s["phi"],
            )
        state.phi_bar = sample_phi_bar(                                               # 9
            state.phi, spec.m_phi_bar, spec.sigma2_phi_i, spec.sigma2_phi_bar,
            global_streams["phi_bar"],
        )
        for i in range(n):
            s = metro_streams[i]
            rates = expit(state.psi[i])
            for t in range(T):
                state.H[i, t] = sample_H(                                             # 10
                    int(N[i, t]), int(C[i, t]), float(rates[t]),
                    (acc_a[i, t + 1], acc_b[i, t + 1]),
                    config.tail_threshold, s["H"], mode=config.h_sampler_mode,
                    h_current=int(state.H[i, t]),
                )
        _check_state(state, C, N, sweep)

        k = sweep - config.burn_in
        if k >= 0 and k % config.thinning == 0 and stored < n_store:
            draws.eta[stored] = state.eta
            draws.psi[stored] = state.psi
            draws.H[stored] = state.H
            draws.nu[stored] = state.nu
            draws.phi[stored] = state.phi
            draws.nu_bar[stored] = state.nu_bar
            draws.phi_bar[stored] = state.phi_bar
            stored += 1
    return draws


def run_chains(
    panel: Panel,
    prior_spec: PriorSpec,
    accuracy_priors: dict[str, AccuracyPrior],
    config: GibbsConfig,
) -> list[PosteriorDraws]:
    """Run ``config.n_chains`` independent chains sequentially.

    Chains differ only in their seed-sequence key, so running them through a
    process pool (see the command-line driver) gives identical results.
    """
    return [
        run_chain(panel, prior_spec, accuracy_priors, config, chain_index=k)
        for k in range(config.n_chains)
    ]
