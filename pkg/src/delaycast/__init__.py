"""Multiview delay-coordinate forecasting for chaotic time series."""

from .backtest import Ledger, StrategyConfig, buy_and_hold, run_backtest, signal_from_predictions
from .embedding import (
    Coordinate,
    DelayMapSpec,
    DesignMatrix,
    Partition,
    build_design,
    enumerate_pool,
    sample_disjoint_partition,
)
from .ensemble import (
    HyperParams,
    PredictionSet,
    SplitScheme,
    cross_validate,
    ensemble_predict,
    horizon_sweep,
    mean_squared_error,
    pearson,
    rolling_origin_run,
    trimmed_mean,
)
from .frame import SeriesFrame, align_join, first_difference, ingest_csv, monthly_anomaly, monthly_means
from .inference import (
    ResampleReport,
    ResidualPool,
    lilliefors_normality,
    predictive_interval,
    resample_correlations,
    rescale_to_pool_range,
    residual_pool,
    variance_scaling_check,
)
from .lorenz import LorenzParams, lorenz_trajectory, rk4_step
from .regression import (
    LinearModel,
    LocalLinearEngine,
    NeighborSet,
    choose_k,
    column_scales,
    forward_select_fit,
    global_linear_fit,
    knn_brute,
    knn_query,
    local_linear_predict,
)
from .synthetic import climate_like_monthly, geometric_random_walk

__version__ = "0.1.0"

__all__ = [
    "Coordinate",
    "DelayMapSpec",
    "DesignMatrix",
    "HyperParams",
    "Ledger",
    "LinearModel",
    "LocalLinearEngine",
    "LorenzParams",
    "NeighborSet",
    "Partition",
    "PredictionSet",
    "ResampleReport",
    "ResidualPool",
    "SeriesFrame",
    "SplitScheme",
    "StrategyConfig",
    "align_join",
    "build_design",
    "buy_and_hold",
    "choose_k",
    "climate_like_monthly",
    "column_scales",
    "cross_validate",
    "ensemble_predict",
    "enumerate_pool",
    "first_difference",
    "forward_select_fit",
    "geometric_random_walk",
    "global_linear_fit",
    "horizon_sweep",
    "ingest_csv",
    "knn_brute",
    "knn_query",
    "lilliefors_normality",
    "local_linear_predict",
    "lorenz_trajectory",
    "mean_squared_error",
    "monthly_anomaly",
    "monthly_means",
    "pearson",
    "predictive_interval",
    "resample_correlations",
    "rescale_to_pool_range",
    "residual_pool",
    "rk4_step",
    "rolling_origin_run",
    "run_backtest",
    "sample_disjoint_partition",
    "signal_from_predictions",
    "trimmed_mean",
    "variance_scaling_check",
]
