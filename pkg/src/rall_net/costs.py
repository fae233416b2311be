"""Per-link costs for the greedy load-aware routing loop.

Base costs combine the hop objective and the link-quality objective by a
weighted sum; working costs add the number of flows already forwarded by
the transmitting node. All arithmetic is exact (``Fraction``) so equal-cost
paths compare equal and tie-breaking is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .exceptions import InvalidPath
from .topology import DirectedLink, Topology

DEFAULT_TH_LQI = 220

Edge = Tuple[int, int]


@dataclass(frozen=True)
class CostParams:
    """Weights and constants of the combined link cost.

    ``p_const=None`` means "use the node count of the topology".
    """

    w_p: float = 0.5
    w_l: float = 0.5
    th_lqi: int = DEFAULT_TH_LQI
    p_const: Optional[int] = None

    def __post_init__(self):
        for name in ("w_p", "w_l"):
            w = getattr(self, name)
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"{name}={w} outside [0, 1]")
        if abs(self.w_p + self.w_l - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {self.w_p} + {self.w_l}")
        if not 0 < self.th_lqi <= 255:
            raise ValueError(f"th_lqi={self.th_lqi} outside (0, 255]")
        if self.p_const is not None and self.p_const <= 0:
            raise ValueError("p_const must be positive")

    def resolve_p_const(self, topology: Topology) -> int:
        return self.p_const if self.p_const is not None else topology.n_nodes


def normalize_lqi(lqi: int, th_lqi: int) -> float:
    """Low-quality penalty: 0 at or above the threshold, else 1 - lqi/th."""
    return float(quality_penalty(lqi, th_lqi))


def quality_penalty(lqi: int, th_lqi: int) -> Fraction:
    if not 0 <= lqi <= 255:
        raise ValueError(f"lqi {lqi} outside [0, 255]")
    if not 0 < th_lqi <= 255:
        raise ValueError(f"th_lqi {th_lqi} outside (0, 255]")
    if lqi >= th_lqi:
        return Fraction(0)
    return Fraction(th_lqi - lqi, th_lqi)


@dataclass
class EdgeCosts:
    """Static base costs, load-adjusted working costs and per-node loads.

    Invariant: ``working[(j, h)] == base[(j, h)] + node_load[j]``.
    """

    base: Dict[Edge, Fraction]
    sink: int
    working: Dict[Edge, Fraction] = field(default=None)
    node_load: Dict[int, int] = field(default=None)
    out_edges: Dict[int, List[Edge]] = field(default=None, repr=False)

    def __post_init__(self):
        if self.working is None:
            self.working = dict(self.base)
        if self.node_load is None:
            nodes = {s for s, _ in self.base} | {d for _, d in self.base} | {self.sink}
            self.node_load = {v: 0 for v in sorted(nodes)}
        if self.out_edges is None:
            out: Dict[int, List[Edge]] = {v: [] for v in self.node_load}
            for e in sorted(self.base):
                out[e[0]].append(e)
            self.out_edges = out

    def copy(self) -> "EdgeCosts":
        return EdgeCosts(dict(self.base), self.sink, dict(self.working),
                         dict(self.node_load), self.out_edges)


def sum_weights(topology: Topology, params: CostParams) -> EdgeCosts:
    """Weighted-sum base cost ``p_const*w_p + w_l*l*p_const`` for every link.

    The quality penalty is rescaled by ``p_const`` so both terms live on the
    same magnitude.
    """
    p = params.resolve_p_const(topology)
    w_p, w_l = Fraction(params.w_p), Fraction(params.w_l)
    hop_term = p * w_p
    base = {
        (s, d): hop_term + w_l * quality_penalty(lqi, params.th_lqi) * p
        for (s, d), lqi in topology.links.items()
    }
    return EdgeCosts(base=base, sink=topology.sink)


def quality_weights(topology: Topology, th_lqi: int, p_const: Optional[int] = None) -> EdgeCosts:
    """Base cost ``l*p_const`` alone, without the hop constant."""
    p = p_const if p_const is not None else topology.n_nodes
    base = {(s, d): quality_penalty(lqi, th_lqi) * p for (s, d), lqi in topology.links.items()}
    return EdgeCosts(base=base, sink=topology.sink)


def check_chain(path: Sequence[DirectedLink], sink: Optional[int] = None) -> None:
    if not path:
        raise InvalidPath("empty path")
    for a, b in zip(path, path[1:]):
        if a.dst != b.src:
            raise InvalidPath(f"link {a.src}->{a.dst} does not chain into {b.src}->{b.dst}")
    if sink is not None and path[-1].dst != sink:
        raise InvalidPath(f"path ends at {path[-1].dst}, not at sink {sink}")


def update_edges(path: Sequence[DirectedLink], costs: EdgeCosts) -> EdgeCosts:
    """Charge one more flow to every transmitting node of ``path``.

    Each such node's load grows by one and all of its out-edges are
    re-priced to ``base + load``. Mutates and returns ``costs``.
    """
    check_chain(path, costs.sink)
    for link in path:
        j = link.src
        if (j, link.dst) not in costs.base:
            raise InvalidPath(f"link {j}->{link.dst} is not in the topology")
        costs.node_load[j] += 1
        load = costs.node_load[j]
        for e in costs.out_edges[j]:
            costs.working[e] = costs.base[e] + load
    return costs
