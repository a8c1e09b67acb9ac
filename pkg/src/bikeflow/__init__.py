"""bikeflow: flow-based community structure for shared-bicycle trip networks.

Pipeline: parse and clean trip CSVs, aggregate them into a directed weighted
station network, solve for visit/flow rates, minimize the two-level
description length to find communities, compare against modularity
baselines, and report community interactions and hour-of-day dynamics.
"""

__version__ = "0.1.0"

from .analytics import (
    CommunityGraph,
    InteractionTable,
    community_graph,
    interaction_table,
    self_containment,
)
from .baselines import ModularityScore, greedy_modularity, louvain, modularity
from .dynamics import HourlyAssignment, column_similarity, hourly_communities
from .flow import ConvergenceError, FlowState, empirical_flow, random_walk_flow
from .infomap import OptimizationResult, OptimizerConfig, infomap
from .mapeq import ModuleFlow, codelength, codelength_delta, module_flows
from .metrics import compare_partitions
from .network import (
    FlowNetwork,
    Station,
    UnknownStationError,
    build_network,
    in_strength,
    out_strength,
)
from .partition import UNASSIGNED, Partition
from .trips import (
    CleaningStats,
    IngestConfig,
    RawTrip,
    TripRecord,
    clean_trips,
    filter_by_hour,
    parse_trips,
)

__all__ = [
    "CleaningStats",
    "CommunityGraph",
    "ConvergenceError",
    "FlowNetwork",
    "FlowState",
    "HourlyAssignment",
    "IngestConfig",
    "InteractionTable",
    "ModularityScore",
    "ModuleFlow",
    "OptimizationResult",
    "OptimizerConfig",
    "Partition",
    "RawTrip",
    "Station",
    "TripRecord",
    "UNASSIGNED",
    "UnknownStationError",
    "build_network",
    "clean_trips",
    "codelength",
    "codelength_delta",
    "column_similarity",
    "community_graph",
    "compare_partitions",
    "empirical_flow",
    "filter_by_hour",
    "greedy_modularity",
    "hourly_communities",
    "in_strength",
    "infomap",
    "interaction_table",
    "louvain",
    "modularity",
    "module_flows",
    "out_strength",
    "parse_trips",
    "random_walk_flow",
    "self_containment",
]
