"""Exact one-dimensional Wasserstein distances, constructive multiscale
bounds, and a Dirichlet-process-mixture posterior-contraction study."""

from .measures import (
    Block,
    DiscreteMeasure,
    DyadicCell,
    SortedSample,
    block_mass,
    cell_masses,
    dyadic_cells,
    empirical_from_sample,
    moment,
    restrict_rescale,
)
from .wasserstein import (
    w1_cdf,
    w1_duality_gap,
    w_infty,
    wp_distance,
    wp_quantile,
    wp_sorted_equal,
)
from .dyadic_bounds import (
    ApproximationUndefinedError,
    BoundReport,
    TailHypothesisError,
    approximate_to,
    bound_combined,
    bound_compact,
    bound_unbounded,
    coupling_discrepancy,
    kappa,
)
from .reference import (
    Laplace,
    ReferenceDistribution,
    StandardNormal,
    StudentT,
    Uniform01,
    approx_error_bound,
    by_name,
    discretize,
    sample,
)
from .dpm import (
    ChainConfig,
    DpmConfig,
    DpmState,
    gibbs_step,
    init_state,
    moment_diagnostic,
    posterior_predictive_draw,
    prior_predictive_sample,
    run_chain,
    tail_mass_diagnostic,
)
from .experiments import StudyConfig, StudyResult, cell_seed, run_cell, run_study

__version__ = "0.1.0"
