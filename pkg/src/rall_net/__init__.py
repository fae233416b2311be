"""Multi-objective WSN routing (hop count, link quality, traffic load)."""

from .costs import CostParams, EdgeCosts, normalize_lqi, sum_weights, update_edges
from .estimators import (BalancedLQIRouter, BPRRouter, LQIRouter, RALLRouter,
                         ShortestPathRouter, make_router)
from .exceptions import (GenerationFailed, InvalidPath, NoTraffic, RallNetError, RoutesIncomplete,
                         TooLarge, Undefined, UnknownAlgorithm, Unreachable)
from .routing import (ALGORITHMS, FlowOrdering, Path, RoutingTable, balanced_lqi, bpr, lqi_baseline,
                      mc_path, order_flows, path_baseline, rall, route)
from .simulator import SimConfig, SimResult, run_simulation
from .topology import DirectedLink, LqiModelParams, Topology, generate_topology, is_connected, lqi_model

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS", "BPRRouter", "BalancedLQIRouter", "CostParams", "DirectedLink", "EdgeCosts",
    "FlowOrdering", "GenerationFailed", "InvalidPath", "LQIRouter", "LqiModelParams", "NoTraffic",
    "Path", "RALLRouter", "RallNetError", "RoutesIncomplete", "RoutingTable", "ShortestPathRouter",
    "SimConfig", "SimResult", "TooLarge", "Topology", "Undefined", "UnknownAlgorithm", "Unreachable",
    "balanced_lqi", "bpr", "generate_topology", "is_connected", "lqi_baseline", "lqi_model",
    "make_router", "mc_path", "normalize_lqi", "order_flows", "path_baseline", "rall", "route",
    "run_simulation", "sum_weights", "update_edges",
]
