"""Simulation laboratory for interference-limited connection graphs.

Samples Poisson and Cox configurations with random transmission powers,
builds the graphs whose edges require a two-way signal-to-interference-
and-noise threshold, and estimates percolation quantities on growing
windows with seeded, replayable Monte Carlo.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .geometry import Window, points_in_box
from .pathloss import (
    BOUNDED_CONE,
    POWER_LAW,
    PathLossModel,
    default_margin,
    gilbert_radius,
    pathloss_eval,
    pathloss_inverse,
    shifted_pathloss,
)
from .measures import (
    DirectingMeasureRealization,
    DirectingMeasureSpec,
    build_directing_measure,
    calibrate_normalization,
)
from .pointproc import (
    MarkedConfiguration,
    NonequidistanceWarning,
    PowerDistribution,
    empirical_intensity,
    mark_powers,
    sample_cox,
    sample_ppp,
    thin_by_power,
)
from .sinr import (
    PairTable,
    SinrParams,
    build_gilbert_graph,
    build_minus_graph,
    build_sinr_graph,
    interference_at,
    minus_pair_table,
    sinr_pair_table,
    sinr_value,
    total_receiver_power,
)
from .graphs import (
    DegreeStats,
    GraphResult,
    classify_degree2_components,
    crossing_exists,
    degree_stats,
    label_clusters,
    largest_cluster_size,
    signal_weighted_neighbors,
)
from .renorm import (
    CoupledParameters,
    RenormParams,
    ScanReport,
    SiteLattice,
    boolean_good_site,
    coupled_parameters,
    gamma_prime,
    good_site,
    interference_split,
    lattice_crossing,
    nice_site_scan,
    power_floor,
    tame_site,
)
from .estimators import (
    BracketError,
    Estimate,
    GammaStarResult,
    LambdaCResult,
    ModelConfig,
    Theorem1Report,
    Theorem2Report,
    Theorem3Report,
    crossing_probability,
    crossing_sweep,
    degree_sweep,
    estimate_gamma_star,
    estimate_lambda_c_gilbert,
    theorem1_experiment,
    theorem2_experiment,
    theorem3_experiment,
    wilson_interval,
)
from .rng import stream_key, substream
