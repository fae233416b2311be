"""Input validation helpers shared by the estimators, CLI and simulator."""

from __future__ import annotations

from typing import Union

from .exceptions import Unreachable
from .routing import RoutingTable
from .topology import Topology, is_connected


def check_topology(topology: Union[Topology, dict, str], require_connected: bool = True) -> Topology:
    """Accept a Topology, its dict form or its JSON text; return a Topology."""
    if isinstance(topology, str):
        topology = Topology.from_json(topology)
    elif isinstance(topology, dict):
        topology = Topology.from_dict(topology)
    elif not isinstance(topology, Topology):
        raise TypeError(f"expected a Topology, got {type(topology).__name__}")
    if topology.n_nodes < 2:
        raise ValueError("a topology needs a sink and at least one source")
    if require_connected and not is_connected(topology):
        raise Unreachable("some nodes cannot reach the sink")
    return topology


def check_routes(routes: Union[RoutingTable, dict, str], topology: Topology) -> RoutingTable:
    if isinstance(routes, str):
        routes = RoutingTable.from_json(routes)
    elif isinstance(routes, dict):
        routes = RoutingTable.from_dict(routes)
    routes.check_covers(topology)
    for p in routes.paths.values():
        for l in p.hops:
            if topology.links.get((l.src, l.dst)) != l.lqi:
                raise ValueError(f"route link {l.src}->{l.dst} does not match the topology")
    return routes
