"""Batch front end.

Subcommands: ``run`` (inference plus summary reports), ``sweep`` (sensitivity
of the rate-change classification to the assumed annual accuracy gain),
``repro`` (reproducibility of posterior-mean rent effects across independent
runs), ``simulate`` (synthetic panel generation), and ``report`` (rebuild the
summary tables from stored draws).

Configuration is a flat ``key = value`` text file; every prior constant and
sampler setting is a key, and command-line flags override file values.  All
reports are written machine-readable (CSV/JSON) with a plain-text summary
formatted from them.  Exit codes: 0 success, 1 validation failure, 2 runtime
failure.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import predictive
from .diagnostics import gelman_rubin, max_mean_deviation
from .gibbs import GibbsConfig, PosteriorDraws, run_chain
from .panel import Panel, load_panel, save_panel
from .priors import AccuracyScenario, PriorSpec, build_accuracy_priors
from .simulate import default_true_params, generate_panel
from .storage import content_hash, load_draws_csv, save_draws_csv, write_manifest

__all__ = ["main", "load_config", "ConfigError"]


class ConfigError(ValueError):
    """Raised for malformed configuration files or values."""


_PRIOR_KEYS = {f.name: f.type for f in fields(PriorSpec)}

_DEFAULTS = {
    # run control
    "panel": None,
    "geo": None,
    "out_dir": "out",
    "seed": 0,
    "chains": 1,
    "burnin": 15_000,
    "samples": 25_000,
    "thinning": 1,
    "threads": 1,
    "tail_threshold": 1e-8,
    "h_sampler_mode": "betabinomial",
    # accuracy scenario
    "scenario": "constant",
    "delta_bar": 0.0,
    "tau": None,
    "step_size": 0.0,
    # analysis
    "rate_bound": 0.04,
    "rate_from": 1,
    "rate_to": None,
    "counterfactual_x": "0,0.05,0.1",
    "zri_next": None,
    # sweep / repro / simulate
    "delta_bar_grid": "0,0.01,0.02,0.03,0.04",
    "runs": 10,
    "sim_metros": 25,
    "sim_years": 6,
}

_INT_KEYS = {"seed", "chains", "burnin", "samples", "thinning", "threads", "tau",
             "rate_from", "rate_to", "runs", "sim_metros", "sim_years",
             "psi0_mc_draws", "psi0_mc_seed"}
_FLOAT_KEYS = {"tail_threshold", "delta_bar", "step_size", "rate_bound"}
_PATH_KEYS = {"panel", "geo", "out_dir", "zri_next"}
_STR_KEYS = {"h_sampler_mode", "scenario", "counterfactual_x", "delta_bar_grid",
             "delta_basis"}


def _coerce(key: str, raw: str):
    raw = raw.strip()
    if raw.lower() in ("none", ""):
        return None
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key in _PATH_KEYS or key in _STR_KEYS:
        return raw
    if key in _PRIOR_KEYS:
        if key in ("psi0_mc_draws", "psi0_mc_seed"):
            return int(raw)
        if key == "delta_basis":
            return raw
        return float(raw)
    raise ConfigError(f"unknown configuration key: {key!r}")


def load_config(path=None, overrides: dict | None = None) -> dict:
    """Flat key=value config file plus overrides, on top of the defaults."""
    cfg = dict(_DEFAULTS)
    for name in _PRIOR_KEYS:
        cfg[name] = getattr(PriorSpec(), name)
    if path is not None:
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, raw = line.partition("=")
            key = key.strip()
            cfg[key] = _coerce(key, raw)
    for key, value in (overrides or {}).items():
        if value is not None:
            cfg[key] = _coerce(key, str(value)) if isinstance(value, str) else value
    return cfg


def _prior_spec(cfg: dict) -> PriorSpec:
    return PriorSpec(**{name: cfg[name] for name in _PRIOR_KEYS})


def _scenario(cfg: dict) -> AccuracyScenario:
    return AccuracyScenario(
        kind=cfg["scenario"],
        delta_bar=float(cfg["delta_bar"]),
        tau=cfg["tau"],
        step_size=float(cfg["step_size"]),
    )


def _gibbs_config(cfg: dict) -> GibbsConfig:
    return GibbsConfig(
        burn_in=cfg["burnin"],
        n_samples=cfg["samples"],
        n_chains=cfg["chains"],
        seed=cfg["seed"],
        thinning=cfg["thinning"],
        tail_threshold=cfg["tail_threshold"],
        h_sampler_mode=cfg["h_sampler_mode"],
        parallelism="chains" if cfg["threads"] > 1 else "none",
    )


def _load_panel(cfg: dict) -> Panel:
    if not cfg.get("panel"):
        raise ConfigError("no panel file given (config key 'panel' or --panel)")
    return load_panel(cfg["panel"], cfg.get("geo"))


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"expected a comma-separated number list, got {text!r}") from None


def _run_chain_worker(args):
    panel, spec, acc, config, k = args
    return run_chain(panel, spec, acc, config, chain_index=k)


def _run_all_chains(panel, spec, acc, config, threads) -> list[PosteriorDraws]:
    jobs = [(panel, spec, acc, config, k) for k in range(config.n_chains)]
    if threads > 1 and config.n_chains > 1:
        with ProcessPoolExecutor(max_workers=min(threads, config.n_chains)) as pool:
            return list(pool.map(_run_chain_worker, jobs))
    return [_run_chain_worker(job) for job in jobs]


def _load_zri_next(cfg: dict, panel: Panel) -> dict[str, float]:
    """Next-year rent index per metro; carry-forward (no change) if unspecified."""
    if cfg.get("zri_next"):
        out = {}
        with open(cfg["zri_next"], newline="") as fh:
            for row in csv.DictReader(fh):
                out[row["metro_id"]] = float(row["zri"])
        missing = [m for m in panel.metro_ids if m not in out]
        if missing:
            raise ConfigError(f"zri_next file misses metros: {missing}")
        return out
    return {m.metro_id: float(m.zri[-1]) for m in panel.metros}


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x) -> str:
    return repr(float(x))


def _summary_tables(pooled, panel, spec, accuracy_priors, zri_next, cfg, out_dir):
    """Write the per-metro results table, rate classification, and
    counterfactual curves; return the table rows for the text report."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(cfg["seed"], 10_001)))
    synth = predictive.synthetic_count(pooled, accuracy_priors, rng)
    synth_s = predictive.summarize(synth.astype(float))
    totals = predictive.impute_totals(pooled)
    forecast = predictive.forecast_next_year(pooled, panel, zri_next, spec, rng)
    forecast_s = predictive.summarize(forecast.astype(float))

    last = pooled.n_years - 1
    rows = []
    for i, metro in enumerate(pooled.metro_ids):
        hud = int(panel.metro(metro).count_total[-1])
        rows.append(
            [
                metro,
                hud,
                _fmt(synth_s.mean[i, last]), _fmt(synth_s.lower[i, last]), _fmt(synth_s.upper[i, last]),
                _fmt(totals.mean[i, last]), _fmt(totals.lower[i, last]), _fmt(totals.upper[i, last]),
                _fmt(forecast_s.mean[i]), _fmt(forecast_s.lower[i]), _fmt(forecast_s.upper[i]),
            ]
        )
    _write_csv(
        out_dir / "summary.csv",
        [
            "metro", "hud_count",
            "synthetic_mean", "synthetic_lo", "synthetic_hi",
            "total_mean", "total_lo", "total_hi",
            "forecast_mean", "forecast_lo", "forecast_hi",
        ],
        rows,
    )

    rc = predictive.rate_change(
        pooled,
        t_from=cfg["rate_from"],
        t_to=cfg["rate_to"] or pooled.n_years,
        bound=cfg["rate_bound"],
    )
    _write_csv(
        out_dir / "rate_change.csv",
        ["metro", "mean", "lo", "hi", "label"],
        [
            [m, _fmt(rc.mean[i]), _fmt(rc.lower[i]), _fmt(rc.upper[i]), rc.label[i]]
            for i, m in enumerate(rc.metro_ids)
        ],
    )

    xs = _float_list(cfg["counterfactual_x"])
    cf = predictive.zri_counterfactual(pooled, panel, xs, rng, accuracy_priors)
    s = cf.h_summary
    cf_rows = []
    for k in range(len(xs)):
        for i, metro in enumerate(cf.metro_ids):
            cf_rows.append(
                [metro, _fmt(cf.x[k]), _fmt(s.mean[k, i, last]),
                 _fmt(s.lower[k, i, last]), _fmt(s.upper[k, i, last])]
            )
    _write_csv(out_dir / "counterfactual.csv", ["metro", "x", "mean", "lo", "hi"], cf_rows)
    return rows, rc


def _text_report(path, rows, rc):
    def cell(mean, lo, hi):
        return f"{float(mean):>9.0f} ({float(lo):.0f}, {float(hi):.0f})".ljust(28)

    header = (
        f"{'metro':<18} {'hud':>7}  {'synthetic (95% CI)':<28}"
        f"{'total (95% CI)':<28}{'forecast (95% CI)':<28}"
    )
    lines = [header]
    for r in rows:
        lines.append(
            f"{r[0]:<18} {r[1]:>7}  "
            + cell(r[2], r[3], r[4])
            + cell(r[5], r[6], r[7])
            + cell(r[8], r[9], r[10])
        )
    lines.append("")
    lines.append("rate change classification:")
    for i, metro in enumerate(rc.metro_ids):
        lines.append(
            f"{metro:<18} {rc.mean[i]:+7.2%} ({rc.lower[i]:+7.2%}, {rc.upper[i]:+7.2%})  {rc.label[i]}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def _manifest_inputs(cfg) -> dict:
    hashes = {}
    for key in ("panel", "geo", "zri_next"):
        if cfg.get(key):
            hashes[key] = content_hash(cfg[key])
    return hashes


def _public_config(cfg: dict) -> dict:
    return {k: cfg[k] for k in sorted(cfg) if k != "out_dir"}


def cmd_run(cfg: dict) -> int:
    t0 = time.time()
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    panel = _load_panel(cfg)
    spec = _prior_spec(cfg)
    scenario = _scenario(cfg)
    accuracy_priors = build_accuracy_priors(panel, spec, scenario)
    config = _gibbs_config(cfg)

    chains = _run_all_chains(panel, spec, accuracy_priors, config, cfg["threads"])
    save_draws_csv(chains, out_dir / "draws.csv")
    pooled = PosteriorDraws.concat(chains) if len(chains) > 1 else chains[0]

    zri_next = _load_zri_next(cfg, panel)
    rows, rc = _summary_tables(pooled, panel, spec, accuracy_priors, zri_next, cfg, out_dir)
    _text_report(out_dir / "summary.txt", rows, rc)

    diagnostics = {}
    if len(chains) >= 2:
        phi = np.stack([c.phi for c in chains])  # (chains, draws, metros)
        diagnostics["gelman_rubin_phi"] = dict(
            zip(pooled.metro_ids, np.round(gelman_rubin(phi), 6).tolist())
        )
    write_manifest(
        out_dir / "manifest.json",
        config=_public_config(cfg),
        input_hashes=_manifest_inputs(cfg),
        wall_time=time.time() - t0,
        diagnostics=diagnostics,
    )
    print(f"run complete: {len(chains)} chain(s), artifacts in {out_dir}")
    return 0


def cmd_sweep(cfg: dict) -> int:
    t0 = time.time()
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    panel = _load_panel(cfg)
    spec = _prior_spec(cfg)
    config = _gibbs_config(cfg)
    grid = _float_list(cfg["delta_bar_grid"])
    if not grid:
        raise ConfigError("empty delta_bar grid")

    rows, flips = [], []
    previous: dict[str, str] | None = None
    for delta_bar in grid:
        scenario = AccuracyScenario(kind="linear", delta_bar=delta_bar)
        accuracy_priors = build_accuracy_priors(panel, spec, scenario)
        chains = _run_all_chains(panel, spec, accuracy_priors, config, cfg["threads"])
        pooled = PosteriorDraws.concat(chains) if len(chains) > 1 else chains[0]
        rc = predictive.rate_change(
            pooled,
            t_from=cfg["rate_from"],
            t_to=cfg["rate_to"] or pooled.n_years,
            bound=cfg["rate_bound"],
        )
        labels = dict(zip(rc.metro_ids, rc.label))
        for i, metro in enumerate(rc.metro_ids):
            rows.append(
                [metro, _fmt(delta_bar), _fmt(rc.mean[i]), _fmt(rc.lower[i]),
                 _fmt(rc.upper[i]), rc.label[i]]
            )
            if previous is not None and previous[metro] != labels[metro]:
                flips.append([metro, _fmt(delta_bar), previous[metro], labels[metro]])
        previous = labels

    _write_csv(out_dir / "sweep.csv", ["metro", "delta_bar", "mean", "lo", "hi", "label"], rows)
    _write_csv(out_dir / "sweep_flips.csv", ["metro", "delta_bar", "from_label", "to_label"], flips)
    write_manifest(
        out_dir / "manifest.json",
        config=_public_config(cfg),
        input_hashes=_manifest_inputs(cfg),
        wall_time=time.time() - t0,
    )
    print(f"sweep complete over delta_bar grid {grid}, artifacts in {out_dir}")
    return 0


def cmd_repro(cfg: dict) -> int:
    t0 = time.time()
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    if cfg["runs"] < 2:
        raise ConfigError("repro needs runs >= 2")
    panel = _load_panel(cfg)
    spec = _prior_spec(cfg)
    scenario = _scenario(cfg)
    accuracy_priors = build_accuracy_priors(panel, spec, scenario)
    config = _gibbs_config(cfg)

    phi_by_run = []
    for j in range(cfg["runs"]):
        # run j reuses the chain machinery with a distinct chain key
        draws = run_chain(panel, spec, accuracy_priors, config, chain_index=j)
        phi_by_run.append(draws.phi)
    deviations = max_mean_deviation(phi_by_run)
    _write_csv(
        out_dir / "repro.csv",
        ["metro", "max_abs_deviation"],
        [[m, _fmt(d)] for m, d in zip(panel.metro_ids, deviations)],
    )
    write_manifest(
        out_dir / "manifest.json",
        config=_public_config(cfg),
        input_hashes=_manifest_inputs(cfg),
        wall_time=time.time() - t0,
        diagnostics={"max_deviation": float(deviations.max())},
    )
    print(
        f"repro complete: {cfg['runs']} runs, largest posterior-mean deviation "
        f"{deviations.max():.5f}, artifacts in {out_dir}"
    )
    return 0


def cmd_simulate(cfg: dict) -> int:
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = _prior_spec(cfg)
    rng = np.random.default_rng(cfg["seed"])
    params = default_true_params(cfg["sim_metros"], cfg["sim_years"], rng, spec)
    panel, truth = generate_panel(
        spec, params, cfg["sim_years"], cfg["sim_metros"], rng, scenario=_scenario(cfg)
    )
    save_panel(panel, out_dir / "panel.csv")
    params.to_json(out_dir / "params.json")
    truth.to_json(out_dir / "truth.json")
    print(f"simulated {cfg['sim_metros']} metros x {cfg['sim_years']} years into {out_dir}")
    return 0


def cmd_report(cfg: dict, draws_path) -> int:
    t0 = time.time()
    out_dir = Path(cfg["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    panel = _load_panel(cfg)
    spec = _prior_spec(cfg)
    scenario = _scenario(cfg)
    accuracy_priors = build_accuracy_priors(panel, spec, scenario)
    chains = load_draws_csv(draws_path)
    pooled = PosteriorDraws.concat(chains) if len(chains) > 1 else chains[0]
    zri_next = _load_zri_next(cfg, panel)
    rows, rc = _summary_tables(pooled, panel, spec, accuracy_priors, zri_next, cfg, out_dir)
    _text_report(out_dir / "summary.txt", rows, rc)
    write_manifest(
        out_dir / "manifest.json",
        config=_public_config(cfg),
        input_hashes={**_manifest_inputs(cfg), "draws": content_hash(draws_path)},
        wall_time=time.time() - t0,
    )
    print(f"report rebuilt from {draws_path} into {out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="countgap",
        description="Joint dynamic model of metro homeless counts, count accuracy, and rent.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key=value configuration file")
        p.add_argument("--panel", help="metro panel CSV")
        p.add_argument("--geo", help="unit-level geography CSV")
        p.add_argument("--seed", type=int)
        p.add_argument("--chains", type=int)
        p.add_argument("--burnin", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--delta-bar", dest="delta_bar", type=float)
        p.add_argument("--scenario", choices=["constant", "linear", "step"])
        p.add_argument("--tau", type=int)
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--threads", type=int)

    for name in ("run", "sweep", "repro", "simulate"):
        add_common(sub.add_parser(name))
    report = sub.add_parser("report")
    add_common(report)
    report.add_argument("--draws", required=True, help="long-format draws CSV to summarize")

    sub.choices["sweep"].add_argument(
        "--delta-bar-grid", dest="delta_bar_grid", help="comma-separated delta_bar values"
    )
    sub.choices["repro"].add_argument("--runs", type=int)
    return parser


_OVERRIDE_KEYS = (
    "panel", "geo", "seed", "chains", "burnin", "samples", "delta_bar",
    "scenario", "tau", "out_dir", "threads", "delta_bar_grid", "runs",
)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        overrides = {
            key: getattr(args, key)
            for key in _OVERRIDE_KEYS
            if getattr(args, key, None) is not None
        }
        cfg = load_config(args.config, overrides)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "repro":
            return cmd_repro(cfg)
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "report":
            return cmd_report(cfg, args.draws)
        parser.error(f"unknown command {args.command}")
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except Exception as err:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
