"""Moment identities and distributional checks for the PG sampler.

The Monte Carlo oracle throughout is the closed-form mean/variance pair; the
exact sampler is also checked for additivity and tilt symmetry, and the
large-shape Gaussian regime against the same moments.
"""

from __future__ import annotations

import numpy as np
import pytest
from scipy.stats import ks_2samp

import countgap as cg

from conftest import two_sample_chi2  # noqa: F401  (used by other suites)


def test_pg_params_validates_shape():
    with pytest.raises(ValueError, match=">= 1"):
        cg.PgParams(b=0, c=1.0)
    assert cg.PgParams(b=3, c=-2.0).c == -2.0


def test_pg_mean_limits():
    assert cg.pg_mean(1, 0.0) == pytest.approx(0.25)
    assert cg.pg_mean(4, 0.0) == pytest.approx(1.0)   # linear in b
    assert cg.pg_var(1, 0.0) == pytest.approx(1 / 24)
    assert cg.pg_var(10, 0.0) == pytest.approx(10 / 24)


def test_pg_moment_continuity_near_zero():
    # the series branch and the closed form agree across their switch points
    for c in (1e-7, 1e-6, 2e-6, 1e-5):
        assert cg.pg_mean(1, c) == pytest.approx(0.25, rel=1e-9)
        assert cg.pg_var(1, c) == pytest.approx(1 / 24, rel=1e-6)
    for c in (0.0499, 0.05, 0.0501):
        closed = (np.sinh(c) - c) / (4 * c**3 * np.cosh(c / 2) ** 2)
        assert cg.pg_var(1, c) == pytest.approx(closed, rel=1e-8)


def test_pg_mean_against_tanh_form():
    c = 2.0
    assert cg.pg_mean(1, c) == pytest.approx(np.tanh(1.0) / 4.0)


@pytest.mark.parametrize("b,c", [(1, 2.0), (1, 3.0)])
def test_exact_sampler_moments_match_oracle(b, c):
    rng = np.random.default_rng(1234)
    n = 10**6
    draws = cg.sample_pg(b, c, rng, size=n)
    mean, var = draws.mean(), draws.var()
    se_mean = np.sqrt(cg.pg_var(b, c) / n)
    m4 = np.mean((draws - mean) ** 4)
    se_var = np.sqrt((m4 - var**2) / n)
    assert abs(mean - cg.pg_mean(b, c)) < 3 * se_mean
    assert abs(var - cg.pg_var(b, c)) < 3 * se_var


def test_all_draws_strictly_positive():
    rng = np.random.default_rng(5)
    draws = cg.sample_pg(1, -3.0, rng, size=20_000)
    assert np.all(draws > 0)
    big = cg.sample_pg(10**6, 0.5, rng, size=100)
    assert np.all(big > 0)


def test_large_b_draws_concentrate_around_mean():
    rng = np.random.default_rng(6)
    b, c = 10**6, 0.5
    mean, sd = cg.pg_mean(b, c), np.sqrt(cg.pg_var(b, c))
    draws = cg.sample_pg(b, c, rng, size=2000)
    assert np.all(np.abs(draws - mean) < 6 * sd)
    assert abs(draws.mean() - mean) < 4 * sd / np.sqrt(2000)


def test_additivity_two_sample():
    # PG(2, c) versus the sum of two PG(1, c) draws: same distribution
    rng = np.random.default_rng(99)
    n = 10**5
    c = 1.3
    direct = cg.sample_pg(2, c, rng, size=n)
    summed = cg.sample_pg(1, c, rng, size=n) + cg.sample_pg(1, c, rng, size=n)
    assert ks_2samp(direct, summed).pvalue > 0.01


def test_tilt_symmetry():
    rng = np.random.default_rng(17)
    n = 10**5
    plus = cg.sample_pg(1, 2.0, rng, size=n)
    minus = cg.sample_pg(1, -2.0, rng, size=n)
    assert ks_2samp(plus, minus).pvalue > 0.01


def test_deterministic_given_seed():
    a = cg.sample_pg(3, 1.0, np.random.default_rng(42), size=1000)
    b = cg.sample_pg(3, 1.0, np.random.default_rng(42), size=1000)
    assert np.array_equal(a, b)
    big_a = cg.sample_pg(10**5, -2.0, np.random.default_rng(42), size=50)
    big_b = cg.sample_pg(10**5, -2.0, np.random.default_rng(42), size=50)
    assert np.array_equal(big_a, big_b)


def test_elementwise_array_parameters():
    rng = np.random.default_rng(0)
    b = np.array([1, 5, 200, 10**6])
    c = np.array([0.0, -1.0, 2.0, 0.25])
    draws = cg.sample_pg(b, c, rng)
    assert draws.shape == (4,)
    assert np.all(draws > 0)
    # rough scale check on the large-b entries
    assert abs(draws[3] - cg.pg_mean(10**6, 0.25)) < 8 * np.sqrt(cg.pg_var(10**6, 0.25))
