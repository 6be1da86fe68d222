"""Tail graphical models for decomposable extremal graphs."""

from pathlib import Path

from ._core import (
    TailgraphError,
    bivariate_normal_cdf,
    chi_estimator,
    clique_ordering,
    conditional_sample,
    derive_document,
    gaussian_limit_law,
    graph_document,
    hr_exponent_measure,
    hr_transition_kernel,
    mvn_cdf,
    normal_cdf,
    normal_quantile,
    run,
    tail_model_law,
    validate_chordal,
)

__all__ = [
    "TailgraphError",
    "bivariate_normal_cdf",
    "chi_estimator",
    "clique_ordering",
    "conditional_sample",
    "derive_document",
    "gaussian_limit_law",
    "graph_document",
    "hr_exponent_measure",
    "hr_transition_kernel",
    "load_config_text",
    "mvn_cdf",
    "normal_cdf",
    "normal_quantile",
    "run",
    "tail_model_law",
    "validate_chordal",
]


def load_config_text(path):
    return Path(path).read_text()
