"""High-dimensional factor-augmented VAR estimation toolkit."""

from .core import (
    CompanionForm,
    FavarParams,
    IdentificationError,
    TimeSeriesPanel,
    build_companion,
    center_columns,
    spectral_radius,
)
from .estimate import (
    FactorExtract,
    Stage1Fit,
    Stage2Fit,
    extract_factors,
    stage1_fit,
    stage2_fit,
)
from .forecast import forecast_benchmark, forecast_favar, forecast_metrics
from .metrics import SupportMetrics, factor_errors, rel_frob_err, support_metrics
from .select import SelectionGrid, bic_score, default_grid, pic_score, select_stage1, select_stage2
from .simulate import SimConfig, gen_calibration, gen_params, gen_var_path, simulate_system
from .solvers import LassoSolution, lasso_row, truncate_rank, truncated_svd

__version__ = "0.1.0"

__all__ = [
    "CompanionForm", "FavarParams", "IdentificationError", "TimeSeriesPanel",
    "build_companion", "center_columns", "spectral_radius",
    "FactorExtract", "Stage1Fit", "Stage2Fit",
    "extract_factors", "stage1_fit", "stage2_fit",
    "forecast_benchmark", "forecast_favar", "forecast_metrics",
    "SupportMetrics", "factor_errors", "rel_frob_err", "support_metrics",
    "SelectionGrid", "bic_score", "default_grid", "pic_score",
    "select_stage1", "select_stage2",
    "SimConfig", "gen_calibration", "gen_params", "gen_var_path", "simulate_system",
    "LassoSolution", "lasso_row", "truncate_rank", "truncated_svd",
]
