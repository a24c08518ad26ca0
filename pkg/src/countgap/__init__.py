"""countgap: joint dynamic Bayesian model of metro homeless counts, imperfect
count accuracy, and rental-cost effects, with Pólya-Gamma Gibbs inference,
posterior-predictive counterfactuals, and one-year-ahead forecasts."""

from .diagnostics import gelman_rubin, max_mean_deviation
from .ffbs import FfbsError, FfbsProblem, filter_forward, sample_backward
from .gibbs import (
    ChainState,
    GibbsConfig,
    GibbsError,
    PosteriorDraws,
    run_chain,
    run_chains,
    sample_H,
)
from .panel import (
    GeoMapping,
    MetroSeries,
    Panel,
    PanelError,
    aggregate_geography,
    bundled_geo_mapping,
    delta_zri,
    load_panel,
    save_panel,
)
from .polya_gamma import B_EXACT, PgParams, pg_mean, pg_var, sample_pg
from .predictive import (
    CounterfactualResult,
    forecast_next_year,
    impute_totals,
    rate_change,
    summarize,
    synthetic_count,
    zri_counterfactual,
)
from .priors import (
    AccuracyPrior,
    AccuracyScenario,
    PriorError,
    PriorSpec,
    accuracy_trajectory,
    baseline_accuracy_mean,
    beta_params,
    build_accuracy_priors,
    calibrate_phi_mean,
    eta0_lambda_setup,
    psi0_prior,
    unsheltered_delta,
)
from .simulate import (
    GroundTruth,
    TrueParams,
    betabinomial_pmf,
    brute_force_H_pmf,
    default_true_params,
    generate_panel,
    smoothed_moments_dense,
)
from .truncnorm import sample_truncated_normal

__version__ = "0.1.0"
