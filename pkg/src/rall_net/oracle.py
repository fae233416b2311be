"""Exact reference solvers for the three single-objective routing problems.

Test-support only. The hop-count and link-quality objectives are separable
per flow, so per-flow shortest paths are jointly optimal; the bottleneck
objective is solved by exhaustive search over per-flow simple paths with
branch-and-bound on the running maximum node load.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .costs import quality_penalty
from .exceptions import TooLarge, Unreachable
from .routing import Path, RoutingTable
from .topology import Topology


@dataclass
class OracleResult:
    objective_value: object
    assignment: Optional[Dict[int, Path]] = None


def _require_connected(t: Topology, reached) -> None:
    missing = [v for v in t.sources if v not in reached]
    if missing:
        raise Unreachable(f"nodes {missing} cannot reach the sink")


def _walk(t: Topology, parent: Dict[int, int], v: int) -> Path:
    nodes = [v]
    while nodes[-1] != t.sink:
        nodes.append(parent[nodes[-1]])
    return Path.from_nodes(t, nodes)


def min_total_hops(t: Topology) -> OracleResult:
    # reverse BFS from the sink; parent[v] is v's next hop
    dist = {t.sink: 0}
    parent: Dict[int, int] = {}
    frontier = [t.sink]
    while frontier:
        nxt = []
        for v in frontier:
            for u in t.predecessors(v):
                if u not in dist:
                    dist[u] = dist[v] + 1
                    parent[u] = v
                    nxt.append(u)
        frontier = nxt
    _require_connected(t, dist)
    return OracleResult(
        objective_value=sum(dist[v] for v in t.sources),
        assignment={v: _walk(t, parent, v) for v in t.sources},
    )


def min_lqi_cost(t: Topology, th_lqi: int) -> OracleResult:
    # reverse Dijkstra from the sink on exact penalties
    dist: Dict[int, Fraction] = {t.sink: Fraction(0)}
    parent: Dict[int, int] = {}
    heap = [(Fraction(0), t.sink)]
    done = set()
    while heap:
        d, v = heapq.heappop(heap)
        if v in done:
            continue
        done.add(v)
        for u in t.predecessors(v):
            nd = d + quality_penalty(t.lqi(u, v), th_lqi)
            if u not in dist or nd < dist[u]:
                dist[u] = nd
                parent[u] = v
                heapq.heappush(heap, (nd, u))
    _require_connected(t, done)
    return OracleResult(
        objective_value=sum((dist[v] for v in t.sources), Fraction(0)),
        assignment={v: _walk(t, parent, v) for v in t.sources},
    )


def simple_sink_paths(t: Topology, src: int) -> List[Tuple[int, ...]]:
    """Every simple directed path from ``src`` to the sink, by DFS."""
    out = []
    stack = [(src, (src,))]
    while stack:
        v, seq = stack.pop()
        if v == t.sink:
            out.append(seq)
            continue
        for u in t.successors(v):
            if u not in seq:
                stack.append((u, seq + (u,)))
    return sorted(out, key=lambda s: (len(s), s))


def min_bottleneck_exact(t: Topology, max_nodes: int = 10, prune: bool = True) -> OracleResult:
    """Minimum over all path assignments of the maximum non-sink node load.

    A flow's own source counts toward its load; the sink is excluded.
    ``prune=False`` runs the plain cross-product search (slow; for checks).
    """
    if t.n_nodes > max_nodes:
        raise TooLarge(f"{t.n_nodes} nodes exceeds the exhaustive-search limit {max_nodes}")
    sources = t.sources
    options = {s: [seq[:-1] for seq in simple_sink_paths(t, s)] for s in sources}
    _require_connected(t, {s for s in sources if options[s]} | {t.sink})

    if not prune:
        best_val, best_choice = None, None
        for choice in itertools.product(*(options[s] for s in sources)):
            loads: Dict[int, int] = {}
            for seq in choice:
                for v in seq:
                    loads[v] = loads.get(v, 0) + 1
            val = max(loads.values())
            if best_val is None or val < best_val:
                best_val, best_choice = val, choice
        return OracleResult(best_val, {s: Path.from_nodes(t, seq + (t.sink,))
                                       for s, seq in zip(sources, best_choice)})

    # most-constrained flows first tightens the bound early
    order = sorted(sources, key=lambda s: (len(options[s]), s))
    loads = {v: 0 for v in range(t.n_nodes)}
    best = {"val": len(sources) + 1, "choice": None}
    chosen: List[Tuple[int, ...]] = []

    def search(i: int, current_max: int) -> None:
        if current_max >= best["val"]:
            return
        if i == len(order):
            best["val"], best["choice"] = current_max, list(chosen)
            return
        for seq in options[order[i]]:
            for v in seq:
                loads[v] += 1
            new_max = max(current_max, max(loads[v] for v in seq))
            chosen.append(seq)
            search(i + 1, new_max)
            chosen.pop()
            for v in seq:
                loads[v] -= 1
            if best["val"] == 1:
                return

    search(0, 0)
    return OracleResult(best["val"], {s: Path.from_nodes(t, seq + (t.sink,))
                                      for s, seq in zip(order, best["choice"])})


def total_hops(table: RoutingTable) -> int:
    return sum(p.hop_count for p in table.paths.values())


def lqi_cost(table: RoutingTable, th_lqi: int) -> Fraction:
    return sum((quality_penalty(l.lqi, th_lqi) for p in table.paths.values() for l in p.hops),
               Fraction(0))


def bottleneck(table: RoutingTable) -> int:
    return table.bottleneck


def flow_conservation_ok(t: Topology, assignment: Dict[int, Path]) -> bool:
    """Check one net outgoing flow per non-sink node and |V|-1 flows into the sink."""
    flows: Dict[Tuple[int, int], int] = {}
    for p in assignment.values():
        for l in p.hops:
            flows[(l.src, l.dst)] = flows.get((l.src, l.dst), 0) + 1
    if any(a < 0 for a in flows.values()):
        return False
    for v in t.sources:
        out_f = sum(a for (s, _), a in flows.items() if s == v)
        in_f = sum(a for (_, d), a in flows.items() if d == v)
        if out_f - in_f != 1:
            return False
    into_sink = sum(a for (_, d), a in flows.items() if d == t.sink)
    return into_sink == t.n_nodes - 1
