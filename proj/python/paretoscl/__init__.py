"""Python bindings for the paretoscl library."""

from ._core import (
    ConfigError,
    ParetoError,
    contrastive_losses,
    cross_entropy,
    epo_weights,
    front_samples,
    gradient_suite,
    min_norm_weights,
    non_uniformity,
    ray_gap,
    resolve_config,
    run_synthetic,
    run_toy,
    vectorize,
    write_two_cluster_task,
)

__all__ = [
    "ConfigError",
    "ParetoError",
    "contrastive_losses",
    "cross_entropy",
    "epo_weights",
    "front_samples",
    "gradient_suite",
    "min_norm_weights",
    "non_uniformity",
    "ray_gap",
    "resolve_config",
    "run_synthetic",
    "run_toy",
    "vectorize",
    "write_two_cluster_task",
]
