"""Sink-bound route computation: RALL and four comparison algorithms.

Every algorithm returns a :class:`RoutingTable` holding one path per
non-sink node. Ties are broken by (cost, hop count, node-id sequence)
everywhere, which makes every routine fully deterministic.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .costs import CostParams, EdgeCosts, quality_penalty, quality_weights, sum_weights, update_edges
from .exceptions import RoutesIncomplete, UnknownAlgorithm, Unreachable
from .topology import DirectedLink, Topology, hop_distances

ALGORITHMS = ("rall", "balanced_lqi", "bpr", "path", "lqi")

Weight = Callable[[int, int], object]


@dataclass(frozen=True)
class Path:
    source: int
    hops: Tuple[DirectedLink, ...]

    def __post_init__(self):
        if not self.hops or self.hops[0].src != self.source:
            raise ValueError(f"path must start at its source {self.source}")
        for a, b in zip(self.hops, self.hops[1:]):
            if a.dst != b.src:
                raise ValueError("links do not chain head-to-tail")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError(f"path {self.nodes} is not simple")

    @property
    def nodes(self) -> Tuple[int, ...]:
        return (self.source,) + tuple(l.dst for l in self.hops)

    @property
    def hop_count(self) -> int:
        return len(self.hops)

    @property
    def transmitters(self) -> Tuple[int, ...]:
        """Nodes that forward the flow, i.e. every node except the sink."""
        return tuple(l.src for l in self.hops)

    @classmethod
    def from_nodes(cls, topology: Topology, nodes: Sequence[int]) -> "Path":
        return cls(nodes[0], tuple(topology.link(s, d) for s, d in zip(nodes, nodes[1:])))


@dataclass
class RoutingTable:
    algorithm: str
    paths: Dict[int, Path]
    edge_flows: Dict[Tuple[int, int], int] = field(default=None)
    node_loads: Dict[int, int] = field(default=None)
    costs: Optional[EdgeCosts] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.edge_flows is None or self.node_loads is None:
            self.edge_flows, self.node_loads = tally(self.paths.values())

    @property
    def bottleneck(self) -> int:
        return max(self.node_loads.values(), default=0)

    @property
    def total_hops(self) -> int:
        return sum(p.hop_count for p in self.paths.values())

    def node_sequences(self) -> Dict[int, Tuple[int, ...]]:
        return {s: p.nodes for s, p in sorted(self.paths.items())}

    def check_covers(self, topology: Topology) -> None:
        missing = [v for v in topology.sources if v not in self.paths]
        if missing:
            raise RoutesIncomplete(f"no route for nodes {missing}")
        for v, p in self.paths.items():
            if p.hops[-1].dst != topology.sink:
                raise RoutesIncomplete(f"route of node {v} does not end at the sink")

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "paths": {str(s): [list(l) for l in p.hops] for s, p in sorted(self.paths.items())},
            "edge_flows": [{"src": s, "dst": d, "flows": f}
                           for (s, d), f in sorted(self.edge_flows.items())],
            "node_loads": {str(v): c for v, c in sorted(self.node_loads.items())},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "RoutingTable":
        paths = {}
        for s, links in doc["paths"].items():
            hops = tuple(DirectedLink(*map(int, l)) for l in links)
            paths[int(s)] = Path(int(s), hops)
        table = cls(doc["algorithm"], paths)
        stored_loads = {int(v): int(c) for v, c in doc.get("node_loads", {}).items()}
        if stored_loads and stored_loads != table.node_loads:
            raise ValueError("node_loads do not match the stored paths")
        return table

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_json(cls, text: str) -> "RoutingTable":
        return cls.from_dict(json.loads(text))


def tally(paths: Iterable[Path]) -> Tuple[Dict[Tuple[int, int], int], Dict[int, int]]:
    """Per-edge flow counts and per-node transit counts (sink excluded)."""
    edge_flows: Dict[Tuple[int, int], int] = {}
    node_loads: Dict[int, int] = {}
    for p in paths:
        for l in p.hops:
            edge_flows[(l.src, l.dst)] = edge_flows.get((l.src, l.dst), 0) + 1
            node_loads[l.src] = node_loads.get(l.src, 0) + 1
    return dict(sorted(edge_flows.items())), dict(sorted(node_loads.items()))


@dataclass(frozen=True)
class FlowOrdering:
    """Order in which flows are routed by the greedy algorithms.

    ``strategy`` is one of ``nearest_first`` (default), ``farthest_first``,
    ``node_id`` or ``random``; ``seed`` is only used by ``random``.
    """

    strategy: str = "nearest_first"
    seed: Optional[int] = None

    STRATEGIES = ("nearest_first", "farthest_first", "node_id", "random")

    def __post_init__(self):
        if self.strategy not in self.STRATEGIES:
            raise ValueError(f"unknown flow ordering {self.strategy!r}")
        if self.strategy == "random" and self.seed is None:
            raise ValueError("random ordering needs a seed")


def order_flows(topology: Topology, ordering: FlowOrdering = FlowOrdering()) -> List[int]:
    sources = topology.sources
    if ordering.strategy == "node_id":
        return sources
    if ordering.strategy == "random":
        rng = np.random.default_rng(ordering.seed)
        return [sources[i] for i in rng.permutation(len(sources))]
    dist = hop_distances(topology)
    far = float("inf")
    if ordering.strategy == "nearest_first":
        return sorted(sources, key=lambda v: (dist.get(v, far), v))
    return sorted(sources, key=lambda v: (-dist.get(v, far), v))


def _best_label(topology: Topology, src: int, dst: int, weight: Weight,
                banned_nodes: FrozenSet[int] = frozenset(),
                banned_edges: FrozenSet[Tuple[int, int]] = frozenset()):
    """Dijkstra over labels (cost, hops, node sequence).

    Appending the same edge to two labels preserves their order, so the
    lexicographic tie-break composes with label-setting.
    """
    start = (0, 0, (src,))
    best = {src: start}
    heap = [start]
    settled = set()
    while heap:
        label = heapq.heappop(heap)
        cost, hops, seq = label
        v = seq[-1]
        if v in settled:
            continue
        settled.add(v)
        if v == dst:
            return label
        for u in topology.successors(v):
            if u in settled or u in banned_nodes or (v, u) in banned_edges:
                continue
            cand = (cost + weight(v, u), hops + 1, seq + (u,))
            prev = best.get(u)
            if prev is None or cand < prev:
                best[u] = cand
                heapq.heappush(heap, cand)
    return None


def _shortest(topology: Topology, src: int, weight: Weight) -> Path:
    if src == topology.sink:
        raise ValueError("source must differ from the sink")
    label = _best_label(topology, src, topology.sink, weight)
    if label is None:
        raise Unreachable(f"node {src} cannot reach sink {topology.sink}")
    return Path.from_nodes(topology, label[2])


def mc_path(src: int, sink: int, costs: EdgeCosts, topology: Topology) -> Path:
    """Minimum working-cost path from ``src`` to ``sink``."""
    if sink != topology.sink:
        raise ValueError("sink does not match the topology")
    working = costs.working
    return _shortest(topology, src, lambda s, d: working[(s, d)])


def k_shortest_paths(topology: Topology, src: int, k: int,
                     weight: Optional[Weight] = None) -> List[Path]:
    """Yen's loopless k-shortest paths to the sink in (cost, hops, sequence) order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    weight = weight or (lambda s, d: 1)
    sink = topology.sink
    first = _best_label(topology, src, sink, weight)
    if first is None:
        raise Unreachable(f"node {src} cannot reach sink {sink}")
    accepted = [first]
    seen = {first[2]}
    candidates: list = []
    while len(accepted) < k:
        prev_seq = accepted[-1][2]
        for i in range(len(prev_seq) - 1):
            root = prev_seq[: i + 1]
            banned_edges = frozenset(
                (seq[i], seq[i + 1]) for _, _, seq in accepted if seq[: i + 1] == root
            )
            spur = _best_label(topology, root[-1], sink, weight,
                               banned_nodes=frozenset(root[:-1]), banned_edges=banned_edges)
            if spur is None:
                continue
            seq = root[:-1] + spur[2]
            if seq in seen:
                continue
            seen.add(seq)
            root_cost = sum((weight(a, b) for a, b in zip(root, root[1:])), 0)
            heapq.heappush(candidates, (root_cost + spur[0], len(seq) - 1, seq))
        if not candidates:
            break
        accepted.append(heapq.heappop(candidates))
    return [Path.from_nodes(topology, seq) for _, _, seq in accepted]


def _greedy(name: str, topology: Topology, costs: EdgeCosts, ordering: FlowOrdering,
            update_loads: bool) -> RoutingTable:
    paths = {}
    for s in order_flows(topology, ordering):
        p = mc_path(s, topology.sink, costs, topology)
        if update_loads:
            update_edges(p.hops, costs)
        paths[s] = p
    return RoutingTable(name, dict(sorted(paths.items())), costs=costs)


def rall(topology: Topology, params: CostParams = CostParams(),
         ordering: FlowOrdering = FlowOrdering(), update_loads: bool = True) -> RoutingTable:
    """Weighted hop/quality cost, Dijkstra per flow, load feedback after each flow.

    ``update_loads=False`` skips the load feedback (used by reduction checks).
    """
    return _greedy("rall", topology, sum_weights(topology, params), ordering, update_loads)


def balanced_lqi(topology: Topology, th_lqi: int, ordering: FlowOrdering = FlowOrdering(),
                 p_const: Optional[int] = None) -> RoutingTable:
    """Same greedy loop as :func:`rall` on the quality term alone (scaled by p_const)."""
    costs = quality_weights(topology, th_lqi, p_const)
    return _greedy("balanced_lqi", topology, costs, ordering, True)


def path_baseline(topology: Topology) -> RoutingTable:
    paths = {s: _shortest(topology, s, lambda a, b: 1) for s in topology.sources}
    return RoutingTable("path", paths)


def lqi_baseline(topology: Topology, th_lqi: int) -> RoutingTable:
    pen = {e: quality_penalty(lqi, th_lqi) for e, lqi in topology.links.items()}
    paths = {s: _shortest(topology, s, lambda a, b: pen[(a, b)]) for s in topology.sources}
    return RoutingTable("lqi", paths)


def bpr(topology: Topology, k: int = 5, ordering: FlowOrdering = FlowOrdering()) -> RoutingTable:
    """Shortest of the k hop-shortest candidates that keeps the bottleneck flat.

    If every candidate raises the current maximum node load, the one with
    the smallest resulting maximum wins (ties: fewer hops, then sequence).
    """
    loads = {v: 0 for v in range(topology.n_nodes)}
    bottleneck = 0
    paths = {}
    for s in order_flows(topology, ordering):
        candidates = k_shortest_paths(topology, s, k)
        chosen = None
        for p in candidates:
            if max(loads[v] + 1 for v in p.transmitters) <= bottleneck:
                chosen = p
                break
        if chosen is None:
            chosen = min(candidates, key=lambda p: (
                max(bottleneck, max(loads[v] + 1 for v in p.transmitters)), p.hop_count, p.nodes))
        for v in chosen.transmitters:
            loads[v] += 1
        bottleneck = max(bottleneck, max(loads[v] for v in chosen.transmitters))
        paths[s] = chosen
    return RoutingTable("bpr", dict(sorted(paths.items())))


def route(topology: Topology, algorithm: str, params: CostParams = CostParams(),
          ordering: FlowOrdering = FlowOrdering(), k: int = 5) -> RoutingTable:
    """Dispatch on algorithm name (one of :data:`ALGORITHMS`)."""
    if algorithm == "rall":
        return rall(topology, params, ordering)
    if algorithm == "balanced_lqi":
        return balanced_lqi(topology, params.th_lqi, ordering, params.p_const)
    if algorithm == "bpr":
        return bpr(topology, k, ordering)
    if algorithm == "path":
        return path_baseline(topology)
    if algorithm == "lqi":
        return lqi_baseline(topology, params.th_lqi)
    raise UnknownAlgorithm(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
