"""Optimal sampling-time design for ODE parameter estimation."""

from ._core import (
    CaseStudy,
    ConfigError,
    IoError,
    NumericError,
    OedError,
    ParameterSpace,
    TimeGrid,
    case_study,
    e_optimal_design,
    eor_design,
    estimate,
    import_attention,
    model_names,
    run_command,
    sensitivities,
    simulate,
    studentized_range_quantile,
    tukey_hsd,
)

__all__ = [
    "CaseStudy",
    "ConfigError",
    "IoError",
    "NumericError",
    "OedError",
    "ParameterSpace",
    "TimeGrid",
    "case_study",
    "e_optimal_design",
    "eor_design",
    "estimate",
    "import_attention",
    "model_names",
    "run_command",
    "sensitivities",
    "simulate",
    "studentized_range_quantile",
    "tukey_hsd",
]
