"""Polya completion for Dirichlet process normal mixtures."""

from ._core import (
    BandKind,
    BandSet,
    CompletionConfig,
    Component,
    GridFunction,
    MixtureDensity,
    ModelConfig,
    Moments,
    NigParams,
    PosteriorDraw,
    Provenance,
    Rng,
    bands,
    complete,
    complete_all,
    count_components,
    count_modes,
    default_grid,
    eval_cdf,
    eval_density,
    galaxies,
    generate_labeled_data,
    marginal_mixture,
    marginal_t_density,
    moment_grid,
    moments_trapezoid,
    nig_posterior_single,
    pointwise_mean,
    poisson_quantile,
    run_chain,
    sample_prior_mixture,
    stick_weights,
    truncated_marginal,
    truncation_level,
)

__all__ = [name for name in dir() if not name.startswith("_")]
