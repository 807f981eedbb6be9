"""SEIPRD transmission model with negative-binomial observations, adaptive
random-walk Metropolis calibration, posterior-predictive forecasts and
scoring rules."""

from ._core import (
    SeiprdError,
    calibrate,
    compartment_names,
    day_from_iso,
    desk_truth,
    ess,
    forecast,
    integrate,
    iso_from_day,
    nb_log_pmf,
    run_chains,
    score,
    score_all,
    score_mixture,
    simulate_desk,
    split_rhat,
    sweep,
)

__all__ = [
    "SeiprdError",
    "calibrate",
    "compartment_names",
    "day_from_iso",
    "desk_truth",
    "ess",
    "forecast",
    "integrate",
    "iso_from_day",
    "nb_log_pmf",
    "run_chains",
    "score",
    "score_all",
    "score_mixture",
    "simulate_desk",
    "split_rhat",
    "sweep",
]
