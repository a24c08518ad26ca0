"""Convergence statistic and reproducibility metric."""

from __future__ import annotations

import numpy as np
import pytest

import countgap as cg


def test_gelman_rubin_iid_chains_near_one():
    rng = np.random.default_rng(0)
    chains = rng.normal(0, 1, size=(4, 5000))
    r = cg.gelman_rubin(chains)
    assert 0.99 < r < 1.01


def test_gelman_rubin_detects_disagreement():
    rng = np.random.default_rng(1)
    chains = rng.normal(0, 1, size=(3, 2000))
    chains[0] += 5.0
    assert cg.gelman_rubin(chains) > 2.0


def test_gelman_rubin_vectorizes_over_parameters():
    rng = np.random.default_rng(2)
    chains = rng.normal(0, 1, size=(3, 1000, 7))
    r = cg.gelman_rubin(chains)
    assert r.shape == (7,)
    assert np.all(r < 1.05)


def test_gelman_rubin_needs_two_chains():
    with pytest.raises(ValueError):
        cg.gelman_rubin(np.zeros((1, 100)))


def test_max_mean_deviation_identical_runs_zero():
    rng = np.random.default_rng(3)
    phi = rng.normal(0.9, 0.1, size=(500, 25))
    dev = cg.max_mean_deviation([phi, phi.copy(), phi.copy()])
    assert dev.shape == (25,)
    assert np.all(dev == 0.0)


def test_max_mean_deviation_reference_is_first_run():
    base = np.zeros((10, 2))
    shifted = np.zeros((10, 2))
    shifted[:, 1] = 0.3
    other = np.zeros((10, 2))
    other[:, 0] = -0.1
    dev = cg.max_mean_deviation([base, shifted, other])
    assert dev[0] == pytest.approx(0.1)
    assert dev[1] == pytest.approx(0.3)


def test_max_mean_deviation_needs_two_runs():
    with pytest.raises(ValueError):
        cg.max_mean_deviation([np.zeros((10, 2))])
