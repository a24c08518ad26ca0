"""Run artifacts: long-format draw CSVs, run manifests, content hashing."""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .gibbs import PosteriorDraws

__all__ = [
    "save_draws_csv",
    "load_draws_csv",
    "content_hash",
    "config_hash",
    "write_manifest",
]

DRAWS_COLUMNS = ["chain", "iter", "param", "metro", "year", "value"]
_PATH_PARAMS = ("eta", "psi", "H")     # per (metro, year)
_METRO_PARAMS = ("nu", "phi")           # per metro
_GLOBAL_PARAMS = ("nu_bar", "phi_bar")


def save_draws_csv(chains: list[PosteriorDraws], path) -> None:
    """Write retained draws of one or more chains as long-format CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DRAWS_COLUMNS)
        for draws in chains:
            chain = draws.meta.get("chain_index", 0)
            years = [int(y) for y in draws.years]
            for it in range(draws.n_draws):
                for param in _PATH_PARAMS:
                    arr = getattr(draws, param)[it]
                    for i, metro in enumerate(draws.metro_ids):
                        for k, year in enumerate(years):
                            value = arr[i, k]
                            text = str(int(value)) if param == "H" else repr(float(value))
                            writer.writerow([chain, it, param, metro, year, text])
                for param in _METRO_PARAMS:
                    arr = getattr(draws, param)[it]
                    for i, metro in enumerate(draws.metro_ids):
                        writer.writerow([chain, it, param, metro, "", repr(float(arr[i]))])
                for param in _GLOBAL_PARAMS:
                    value = getattr(draws, param)[it]
                    writer.writerow([chain, it, param, "", "", repr(float(value))])


def load_draws_csv(path) -> list[PosteriorDraws]:
    """Reconstruct per-chain draws from a long-format CSV."""
    records: dict[int, dict] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != DRAWS_COLUMNS:
            raise ValueError(f"draws file must have columns {DRAWS_COLUMNS}")
        for row in reader:
            chain = int(row["chain"])
            rec = records.setdefault(
                chain, {"iters": 0, "metros": [], "years": [], "cells": []}
            )
            it = int(row["iter"])
            rec["iters"] = max(rec["iters"], it + 1)
            metro = row["metro"]
            if metro and metro not in rec["metros"]:
                rec["metros"].append(metro)
            if row["year"]:
                year = int(row["year"])
                if year not in rec["years"]:
                    rec["years"].append(year)
            rec["cells"].append((it, row["param"], metro, row["year"], row["value"]))

    out = []
    for chain in sorted(records):
        rec = records[chain]
        metros = rec["metros"]
        years = sorted(rec["years"])
        year_idx = {y: k for k, y in enumerate(years)}
        metro_idx = {m: i for i, m in enumerate(metros)}
        n_draws, n, T = rec["iters"], len(metros), len(years)
        draws = PosteriorDraws(
            metro_ids=metros,
            years=np.array(years),
            eta=np.empty((n_draws, n, T)),
            psi=np.empty((n_draws, n, T)),
            H=np.empty((n_draws, n, T), dtype=np.int64),
            nu=np.empty((n_draws, n)),
            phi=np.empty((n_draws, n)),
            nu_bar=np.empty(n_draws),
            phi_bar=np.empty(n_draws),
            meta={"chain_index": chain, "loaded_from": str(path)},
        )
        for it, param, metro, year, value in rec["cells"]:
            if param in _PATH_PARAMS:
                arr = getattr(draws, param)
                arr[it, metro_idx[metro], year_idx[int(year)]] = (
                    int(value) if param == "H" else float(value)
                )
            elif param in _METRO_PARAMS:
                getattr(draws, param)[it, metro_idx[metro]] = float(value)
            elif param in _GLOBAL_PARAMS:
                getattr(draws, param)[it] = float(value)
            else:
                raise ValueError(f"unknown param in draws file: {param!r}")
        out.append(draws)
    return out


def content_hash(path) -> str:
    """SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def config_hash(payload: dict) -> str:
    """SHA-256 over a canonical JSON rendering of a configuration mapping."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()


def write_manifest(path, *, config: dict, input_hashes: dict, wall_time: float,
                   diagnostics: dict | None = None) -> dict:
    """Write the run manifest: everything needed to bit-reproduce the run."""
    manifest = {
        "config": config,
        "config_hash": config_hash(config),
        "inputs": input_hashes,
        "wall_time_seconds": wall_time,
        "diagnostics": diagnostics or {},
    }
    Path(path).write_text(json.dumps(manifest, indent=1, sort_keys=True, default=str))
    return manifest
