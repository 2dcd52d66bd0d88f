"""Collaborative edge caching in two-tier small-cell networks.

Evaluate the average cache hit ratio of a probabilistic placement and
maximize it with a modified particle swarm optimizer.
"""

from .content import CatalogParams, PreferenceProfile, generate_preferences, zipf_pmf
from .errors import (
    EdgeCacheError,
    ModelDomainError,
    NumericError,
    OptimizerError,
    ParameterError,
    TopologyError,
)
from .hitmodel import HitBreakdown, Placement, chr_user, hit_breakdown, make_objective, mc_hit_oracle, sigma
from .optimizer import (
    PsoConfig,
    Swarm,
    baseline_equal,
    baseline_random,
    init_swarm,
    optimize,
    step,
)
from .phy import PhyParams, SuccessProbs, closed_form_success, mc_success_oracle, sinc_norm
from .topology import NetworkParams, Topology, associate, build_topology, sample_hppp

__version__ = "0.1.0"

__all__ = [
    "CatalogParams",
    "PreferenceProfile",
    "generate_preferences",
    "zipf_pmf",
    "EdgeCacheError",
    "ModelDomainError",
    "NumericError",
    "OptimizerError",
    "ParameterError",
    "TopologyError",
    "HitBreakdown",
    "Placement",
    "chr_user",
    "hit_breakdown",
    "make_objective",
    "mc_hit_oracle",
    "sigma",
    "PsoConfig",
    "Swarm",
    "baseline_equal",
    "baseline_random",
    "init_swarm",
    "optimize",
    "step",
    "PhyParams",
    "SuccessProbs",
    "closed_form_success",
    "mc_success_oracle",
    "sinc_norm",
    "NetworkParams",
    "Topology",
    "associate",
    "build_topology",
    "sample_hppp",
]
