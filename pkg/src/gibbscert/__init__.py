"""Uniqueness certificates and finite-volume experiments for Gibbs fields on hypergraphs.

The package builds dependence hypergraphs and their line graphs, measures
degree growth along connected subsets (animals) and simple paths, evaluates
several sufficient conditions for uniqueness of the associated Markov random
field, and validates the conditions at small scale with exact finite-volume
Gibbs kernels and boundary-sensitivity experiments.
"""

__version__ = "0.1.0"

from .hypergraph import (
    Hyperedge,
    Hypergraph,
    SeparabilityReport,
    boundary,
    check_separability,
    edge_neighborhood,
    span,
)
from .linegraph import (
    INFINITE_DISTANCE,
    LineGraph,
    ball,
    build_line_graph,
    dist,
    sphere,
    volume_of_ball,
)
from .enumeration import (
    Budget,
    GrowthFunction,
    GROWTH_LINEAR,
    GROWTH_LOG,
    animal_average,
    enumerate_animals,
    enumerate_paths,
    growth_power_of_log,
    path_oscillation_average,
    verify_path_count_bound,
)
from .conditions import (
    ConditionReport,
    InteractionBounds,
    TemperednessCertificate,
    certify_temperedness,
    dobrushin_check,
    explicit_kappa_check,
    main_uniqueness_check,
    phi_class_certificate,
)
from .models import (
    CliqueTreeSpec,
    RandomInteractionSpec,
    build_overlapping_cliques,
    curie_weiss_factor_table,
    curie_weiss_oscillation,
    sample_random_interactions,
    tau_and_threshold,
)
from .gibbs import (
    FactorModel,
    SpinSpace,
    boundary_sensitivity,
    disorder_decay_experiment,
    exact_kernel,
    gamma_factor_bound_check,
    gibbs_sampler,
    h_volume,
    kernel_marginals,
)
