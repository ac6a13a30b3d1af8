"""Simulation and verification lab for critical beta-splitting trees and the
equivalent subordinator-driven infinite occupancy scheme."""

from .chains import (
    ChainTrace,
    ExactLaw,
    LeafStat,
    OccupancyStat,
    exact_law,
    exact_occupancy_law,
    leaf_stat_from_chain,
    occupancy_stat_from_chain,
    run_chain,
    sample_jump,
)
from .limits import (
    LimitModel,
    critical_constants,
    joint_standardize,
    limit_covariance,
    limit_model,
    sample_limit_vector,
    standardize,
)
from .special import (
    centering_integral,
    exp_integral_e1,
    gamma_cdf,
    h_r,
    harmonic,
    harmonic_exact,
    moment,
    phi,
    phi_deriv,
)
from .stats import SampleMatrix, TestReport, summarize
from .subordinator import (
    LevyTail,
    poissonized_counts,
    simulate_occupancy,
    tail,
    tail_inverse,
)
from .trees import (
    SplitDistribution,
    SplitTree,
    build_tree,
    leaf_stats,
    sample_split,
    sample_uniform_leaf_stat,
    split_pmf,
)
from .verify import DEFAULT_SEEDS, run_suite

__version__ = "0.1.0"

__all__ = [
    "ChainTrace", "ExactLaw", "LeafStat", "OccupancyStat", "exact_law",
    "exact_occupancy_law", "leaf_stat_from_chain", "occupancy_stat_from_chain",
    "run_chain", "sample_jump", "LimitModel", "critical_constants",
    "joint_standardize", "limit_covariance", "limit_model",
    "sample_limit_vector", "standardize", "centering_integral",
    "exp_integral_e1", "gamma_cdf", "h_r", "harmonic", "harmonic_exact",
    "moment", "phi", "phi_deriv", "SampleMatrix", "TestReport", "summarize",
    "LevyTail", "poissonized_counts", "simulate_occupancy", "tail",
    "tail_inverse", "SplitDistribution", "SplitTree", "build_tree",
    "leaf_stats", "sample_split", "sample_uniform_leaf_stat", "split_pmf",
    "DEFAULT_SEEDS", "run_suite",
]
