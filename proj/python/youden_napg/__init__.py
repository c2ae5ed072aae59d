"""Sparse biomarker combination by maximizing a smoothed, SCAD-penalized weighted Youden index."""

from ._core import (
    ContractViolation,
    IngestionError,
    ValidationError,
    bench,
    best_cutoff_scan,
    default_bandwidth,
    default_lambda_grid,
    evaluate,
    fit,
    generate,
    lasso_logistic_fit,
    load_dataset,
    normal_cdf,
    run_replications,
    scad_prox,
    scad_value,
    smooth_f,
    smooth_grad,
)

__all__ = [
    "ContractViolation",
    "IngestionError",
    "ValidationError",
    "bench",
    "best_cutoff_scan",
    "default_bandwidth",
    "default_lambda_grid",
    "evaluate",
    "fit",
    "generate",
    "lasso_logistic_fit",
    "load_dataset",
    "normal_cdf",
    "run_replications",
    "scad_prox",
    "scad_value",
    "smooth_f",
    "smooth_grad",
]
