"""Selective sampling for best-arm identification in linear bandits."""

from ._selsamp import (
    InfeasibleBudget,
    Instance,
    SelsampError,
    SingularMatrixError,
    SolverFailure,
    benchmark_instance,
    beta_constant,
    direction_set,
    gap_and_best,
    lower_bound_label_curve,
    lower_bound_unlabeled,
    oracle_design,
    psd_project,
    quad_form_inv,
    rho,
    robust_mean,
    run,
    selection_prob,
    sweep_csv,
    two_point_instance,
)

__all__ = [
    "InfeasibleBudget",
    "Instance",
    "SelsampError",
    "SingularMatrixError",
    "SolverFailure",
    "benchmark_instance",
    "beta_constant",
    "direction_set",
    "gap_and_best",
    "lower_bound_label_curve",
    "lower_bound_unlabeled",
    "oracle_design",
    "psd_project",
    "quad_form_inv",
    "rho",
    "robust_mean",
    "run",
    "selection_prob",
    "sweep_csv",
    "two_point_instance",
]
