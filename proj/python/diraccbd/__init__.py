"""Causal block diagram simulation with Dirac impulses as first-class values."""

from ._core import (
    CbdError,
    Model,
    StepSample,
    Trace,
    add_samples,
    analytic_bouncing_ball,
    check_model,
    compare,
    finite_difference_table,
    leibniz_product,
    load_model,
    load_model_file,
    max_magnitude,
    negate_sample,
    printed_max_magnitude,
    simulate,
)

__all__ = [
    "CbdError",
    "Model",
    "StepSample",
    "Trace",
    "add_samples",
    "analytic_bouncing_ball",
    "check_model",
    "compare",
    "finite_difference_table",
    "leibniz_product",
    "load_model",
    "load_model_file",
    "max_magnitude",
    "negate_sample",
    "printed_max_magnitude",
    "simulate",
]
