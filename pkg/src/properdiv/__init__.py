"""Proper divergences between distributions and empirical measures.

Exact divergences (IQ, CRPS, Wasserstein, KS, Dawid-Sebastiani, KL and
others) on piecewise-linear CDFs, categorical vectors and moment summaries;
a Monte Carlo lab for k-propriety; and a gridded model-ranking pipeline.
"""

from .divergences import (
    DIVERGENCE_IDS,
    PROPRIETY,
    DivergenceSpec,
    DivergenceValue,
    Propriety,
    WeightFunction,
    area_validation_metric,
    brier_divergence,
    dawid_sebastiani,
    divergence,
    hellinger_distance,
    improper_mahalanobis,
    iq_distance,
    kl_divergence,
    kl_score_divergence,
    ks_distance,
    mahalanobis_divergence,
    mean_value_divergence,
    wasserstein,
    weighted_iq,
)
from .errors import (
    EmptyDataset,
    IncompleteYear,
    InvalidInput,
    NoCommonCells,
    OutOfRange,
    ParseError,
    ProperDivError,
    SingularCovariance,
    Unsupported,
)
from .gridded_eval import (
    DivergenceMap,
    GridDataset,
    RankingTable,
    internal_variability_baseline,
    load_grid_dataset,
    per_cell_divergence,
    rank_models,
    spatial_average,
)
from .measures import (
    CategoricalDist,
    EmpiricalMeasure,
    MomentSummary,
    PiecewiseLinearCdf,
    annual_maxima,
    bin_to_categorical,
    cdf_eval,
    empirical_from_samples,
    moment_summary,
    quantile,
)
from .propriety_lab import (
    CounterexampleFamily,
    McConfig,
    ProprietyVerdict,
    Sampler,
    Scenario,
    asymptotic_curve,
    build_counterexample,
    exact_expected_divergence,
    exact_expected_divergence_k1,
    hellinger_binary_k1,
    mc_expected_divergence,
    propriety_check,
)
from .scores import brier_score, crps, ds_score, kernel_score, log_score, mean_score, score_divergence, self_score

__version__ = "0.1.0"
