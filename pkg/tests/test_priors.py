"""Prior elicitation: moment matching, accuracy trajectories, calibration,
baseline log-odds priors."""

from __future__ import annotations

import numpy as np
import pytest

import countgap as cg


# --- baseline accuracy -------------------------------------------------------

def test_baseline_accuracy_all_sheltered():
    assert cg.baseline_accuracy_mean(100, 0) == pytest.approx(1.0)


def test_baseline_accuracy_all_unsheltered():
    assert cg.baseline_accuracy_mean(0, 100) == pytest.approx(0.6)


def test_baseline_accuracy_equal_split():
    assert cg.baseline_accuracy_mean(50, 50) == pytest.approx(0.8)


def test_baseline_accuracy_zero_total_rejected():
    with pytest.raises(cg.PriorError):
        cg.baseline_accuracy_mean(0, 0)


# --- beta moment matching ----------------------------------------------------

def test_beta_params_frozen_example():
    a, b = cg.beta_params(0.75, 0.0005)
    assert a == pytest.approx(280.5, abs=1e-9)
    assert b == pytest.approx(93.5, abs=1e-9)


def test_beta_params_monte_carlo_agreement():
    # the matched beta reproduces the requested moments in simulation
    a, b = cg.beta_params(0.75, 0.0005)
    rng = np.random.default_rng(2)
    draws = rng.beta(a, b, size=10**6)
    assert draws.mean() == pytest.approx(0.75, abs=3 * np.sqrt(0.0005 / 10**6))
    var = draws.var()
    se_var = np.sqrt((np.mean((draws - draws.mean()) ** 4) - var**2) / 10**6)
    assert var == pytest.approx(0.0005, abs=3 * se_var)


def test_beta_params_round_trip_to_1e12():
    rng = np.random.default_rng(0)
    for _ in range(100):
        m = rng.uniform(0.05, 0.95)
        v = rng.uniform(0.1, 0.9) * m * (1 - m)
        a, b = cg.beta_params(m, v)
        mean_back = a / (a + b)
        var_back = a * b / ((a + b) ** 2 * (a + b + 1))
        assert abs(mean_back - m) < 1e-12
        assert abs(var_back - v) < 1e-12


def test_beta_params_expanded_form_equivalence():
    # the expanded b expression (v/m^2)(a^2/m + a) equals the reduced form
    rng = np.random.default_rng(1)
    for _ in range(100):
        m = rng.uniform(0.05, 0.95)
        v = rng.uniform(0.05, 0.95) * m * (1 - m)
        a, b = cg.beta_params(m, v)
        b_expanded = (v / m**2) * (a**2 / m + a)
        assert b == pytest.approx(b_expanded, rel=1e-9)


def test_beta_params_variance_boundary():
    # the feasible range is variance < mean(1-mean); the uniform sits strictly
    # inside it and matches Beta(1, 1) exactly
    assert cg.beta_params(0.5, 1 / 12) == pytest.approx((1.0, 1.0))
    with pytest.raises(cg.PriorError, match="no beta"):
        cg.beta_params(0.5, 0.25)
    with pytest.raises(cg.PriorError, match="no beta"):
        cg.beta_params(0.2, 0.17)


# --- accuracy gain basis ------------------------------------------------------

def test_unsheltered_delta_all_sheltered():
    assert cg.unsheltered_delta(0.02, 100, 100) == pytest.approx(0.02)


def test_unsheltered_delta_zero_gain():
    assert cg.unsheltered_delta(0.0, 25, 100) == 0.0
    assert cg.unsheltered_delta(0.0, 25, 100, basis="unsheltered") == 0.0


def test_unsheltered_delta_both_bases():
    assert cg.unsheltered_delta(0.02, 25, 100) == pytest.approx(0.005)
    assert cg.unsheltered_delta(0.02, 25, 100, basis="unsheltered") == pytest.approx(0.015)


# --- trajectories --------------------------------------------------------------

def test_trajectory_constant():
    prior = cg.accuracy_trajectory(cg.AccuracyScenario(kind="constant"), 0.8, 6)
    assert np.allclose(prior.mean[1:], 0.8)
    assert np.allclose(prior.var[1:], 0.0005)
    assert len(prior.mean) == 7  # baseline + six modeled years


def test_trajectory_linear_caps_at_one():
    with pytest.warns(UserWarning, match="shrunk"):
        prior = cg.accuracy_trajectory(
            cg.AccuracyScenario(kind="linear", delta_bar=0.1), 0.95, 4, delta_i=0.1
        )
    assert prior.mean[1] == pytest.approx(0.95)
    assert np.all(prior.mean[2:] < 1.0)
    assert np.all(prior.mean[2:] > 0.99)
    # shrunk rows still define valid betas with mass below 1
    assert np.all(prior.mean + 2 * np.sqrt(prior.var) < 1.0)


def test_trajectory_step():
    prior = cg.accuracy_trajectory(
        cg.AccuracyScenario(kind="step", tau=3, step_size=0.1), 0.7, 6
    )
    assert np.allclose(prior.mean[1:], [0.7, 0.7, 0.8, 0.8, 0.8, 0.8])


def test_trajectory_monotone_nondecreasing():
    for scenario, delta in [
        (cg.AccuracyScenario(kind="linear", delta_bar=0.02), 0.013),
        (cg.AccuracyScenario(kind="step", tau=2, step_size=0.07), 0.0),
    ]:
        prior = cg.accuracy_trajectory(scenario, 0.72, 6, delta_i=delta)
        assert np.all(np.diff(prior.mean[1:]) >= -1e-15)
        assert np.all(prior.mean <= 1.0)


def test_trajectory_step_outside_years_rejected():
    with pytest.raises(cg.PriorError, match="outside"):
        cg.accuracy_trajectory(cg.AccuracyScenario(kind="step", tau=9, step_size=0.1), 0.7, 6)


# --- rent-effect prior calibration ---------------------------------------------

def test_calibrate_default_reproduces_shipped_constant():
    m = cg.calibrate_phi_mean(-5.5, 100 / 1534, 1.0634)
    assert m == pytest.approx(0.94, abs=0.005)


def test_calibrate_rate_equation_root():
    # the exact rate-ratio equation solves slightly above the odds reading
    m = cg.calibrate_phi_mean(-5.5, 100 / 1534, 1.0634, method="rate")
    assert m == pytest.approx(0.9469, abs=5e-4)
    lhs = (1 + np.exp(5.5)) / (1 + np.exp(5.5 - (100 / 1534) * m))
    assert lhs == pytest.approx(1.0634, abs=1e-9)


def test_calibrate_methods_agree_in_small_rate_limit():
    odds = cg.calibrate_phi_mean(-12.0, 0.05, 1.05)
    rate = cg.calibrate_phi_mean(-12.0, 0.05, 1.05, method="rate")
    assert odds == pytest.approx(rate, rel=1e-4)


def test_calibrate_target_one_gives_zero():
    assert cg.calibrate_phi_mean(-5.5, 0.065, 1.0) == pytest.approx(0.0, abs=1e-8)


def test_calibrate_round_trip():
    z, target = 0.0652, 1.0634
    m = cg.calibrate_phi_mean(-5.5, z, target)
    assert np.exp(z * m) == pytest.approx(target, abs=1e-9)


def test_calibrate_monotone_in_target():
    ms = [cg.calibrate_phi_mean(-5.5, 0.065, t) for t in (1.01, 1.05, 1.10, 1.25)]
    assert all(b > a for a, b in zip(ms, ms[1:]))
    ms_rate = [cg.calibrate_phi_mean(-5.5, 0.065, t, method="rate") for t in (1.01, 1.05, 1.10)]
    assert all(b > a for a, b in zip(ms_rate, ms_rate[1:]))


# --- baseline log-odds prior -----------------------------------------------------

def test_psi0_degenerate_accuracy_is_plain_logit():
    # a near-degenerate accuracy at 1 leaves the count uninflated
    a, b = cg.beta_params(1 - 1e-9, 1e-14)
    mean, var = cg.psi0_prior(10_000, 2_000_000, (a, b))
    assert var == 0.01
    assert mean == pytest.approx(np.log(0.005 / 0.995), abs=1e-3)


def test_psi0_frozen_example():
    # beta matched to mean 0.75, var 5e-4 has E[1/pi] = (a+b-1)/(a-1) = 1.33453,
    # giving logit(1.33453 * 0.005) = -5.003
    a, b = cg.beta_params(0.75, 0.0005)
    closed_form = (a + b - 1) / (a - 1)
    assert closed_form == pytest.approx(1.33453, abs=1e-5)
    mean, _ = cg.psi0_prior(10_000, 2_000_000, (a, b))
    assert mean == pytest.approx(-5.003, abs=5e-3)
    assert mean == pytest.approx(-5.00, abs=1e-2)


def test_psi0_jensen_inequality():
    # E[1/pi] > 1/E[pi] whenever the accuracy has any spread
    a, b = cg.beta_params(0.75, 0.0005)
    rng = np.random.default_rng(8)
    inv = np.mean(1.0 / rng.beta(a, b, size=10**6))
    assert inv > 1 / 0.75
    mean, _ = cg.psi0_prior(10_000, 2_000_000, (a, b))
    assert mean > np.log(0.005 / 0.995)


def test_psi0_rejects_inflation_beyond_population():
    a, b = cg.beta_params(0.6, 0.0005)
    with pytest.raises(cg.PriorError, match="population"):
        cg.psi0_prior(9_000, 10_000, (a, b))


def test_psi0_monte_carlo_is_seeded():
    a, b = cg.beta_params(0.8, 0.0005)
    m1, _ = cg.psi0_prior(5_000, 1_000_000, (a, b))
    m2, _ = cg.psi0_prior(5_000, 1_000_000, (a, b))
    assert m1 == m2


# --- population anchors -----------------------------------------------------------

def test_eta0_lambda_setup():
    lam, mean0, var0 = cg.eta0_lambda_setup(10**6)
    assert lam == 2e6
    assert mean0 == 0.0
    assert var0 == 0.0001
    # logistic(0) * lambda_bar recovers the baseline population
    assert lam / (1 + np.exp(-mean0)) == pytest.approx(10**6)


def test_eta0_prior_interval_covers_baseline_population():
    # simulate baseline-population draws through the generative chain
    rng = np.random.default_rng(4)
    N0 = 10**6
    lam, mean0, var0 = cg.eta0_lambda_setup(N0)
    eta0 = rng.normal(mean0, np.sqrt(var0), size=20_000)
    theta0 = 1 / (1 + np.exp(-eta0))
    draws = rng.poisson(lam * theta0)
    lo, hi = np.quantile(draws, [0.025, 0.975])
    assert lo < N0 < hi


def test_prior_spec_rejects_nonpositive_variance():
    with pytest.raises(cg.PriorError):
        cg.PriorSpec(sigma2_psi=0.0)


def test_build_accuracy_priors_shapes(tiny_panel):
    spec = cg.PriorSpec()
    priors = cg.build_accuracy_priors(
        tiny_panel, spec, cg.AccuracyScenario(kind="linear", delta_bar=0.02)
    )
    assert set(priors) == set(tiny_panel.metro_ids)
    for prior in priors.values():
        assert prior.n_years == tiny_panel.n_years
        assert np.all(prior.a > 0) and np.all(prior.b > 0)
