"""Convergence and reproducibility diagnostics for multi-chain runs."""

from __future__ import annotations

import numpy as np

__all__ = ["gelman_rubin", "max_mean_deviation"]


def gelman_rubin(chains: np.ndarray) -> np.ndarray | float:
    """Potential scale reduction factor across chains.

    ``chains`` has shape (n_chains, n_draws) or (n_chains, n_draws, ...); the
    statistic is computed per trailing index.  Values near 1 indicate the
    chains agree; below 1.05 is the working threshold here.
    """
    chains = np.asarray(chains, dtype=float)
    if chains.ndim < 2 or chains.shape[0] < 2:
        raise ValueError("need at least two chains")
    m, n = chains.shape[0], chains.shape[1]
    if n < 2:
        raise ValueError("need at least two draws per chain")
    means = chains.mean(axis=1)
    within = chains.var(axis=1, ddof=1).mean(axis=0)
    between = n * means.var(axis=0, ddof=1)
    pooled = (n - 1) / n * within + between / n
    return np.sqrt(pooled / within)


def max_mean_deviation(phi_draws_by_run: list[np.ndarray]) -> np.ndarray:
    """Reproducibility metric: per metro, the largest absolute deviation of
    the posterior-mean rent effect across runs, measured against run 1.

    Each array has shape (n_draws, n_metros); returns (n_metros,).
    """
    if len(phi_draws_by_run) < 2:
        raise ValueError("need at least two runs to compare")
    means = np.stack([np.asarray(d).mean(axis=0) for d in phi_draws_by_run])
    return np.abs(means[1:] - means[0]).max(axis=0)
