"""Random WSN topologies with asymmetric, LQI-annotated directed links.

Node 0 is the sink and sits at the centre of the square deployment area.
Every other node is drawn from a 2D normal distribution centred on the
area (standard deviation ``area_side / 4``) and rejection-sampled into the
square. Each ordered pair within radio range gets its own LQI value, so
``lqi(s, d)`` and ``lqi(d, s)`` are independent.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, NamedTuple, Optional, Tuple

import numpy as np

from .exceptions import GenerationFailed

SINK = 0
MAX_ATTEMPTS = 1000


class DirectedLink(NamedTuple):
    src: int
    dst: int
    lqi: int


@dataclass(frozen=True)
class LqiModelParams:
    """Parameters of the distance-based LQI model.

    ``gamma`` shapes the decay with distance, ``sigma`` is the standard
    deviation of the additive Gaussian noise (in LQI units).
    """

    gamma: float = 1.5
    sigma: float = 12.0


def lqi_model(distance: float, range_: float, params: LqiModelParams = LqiModelParams(),
              noise_draw: float = 0.0) -> int:
    """LQI in [0, 255] for a link of length ``distance``.

    ``noise_draw`` is a sample from Normal(0, params.sigma), supplied by the
    caller so the function stays pure.
    """
    frac = min(max(distance / range_, 0.0), 1.0)
    value = 255.0 * (1.0 - frac) ** params.gamma + noise_draw
    return int(min(max(round(value), 0), 255))


@dataclass
class Topology:
    positions: List[Tuple[float, float]]
    links: Dict[Tuple[int, int], int]
    area_side: float
    range: float
    sink: int = SINK
    _succ: Dict[int, List[int]] = field(init=False, repr=False, compare=False)
    _pred: Dict[int, List[int]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.positions)
        if not 0 <= self.sink < n:
            raise ValueError(f"sink {self.sink} is not a node id")
        succ: Dict[int, List[int]] = {v: [] for v in range(n)}
        pred: Dict[int, List[int]] = {v: [] for v in range(n)}
        for (s, d), lqi in self.links.items():
            if s == d:
                raise ValueError(f"self-loop on node {s}")
            if not (0 <= s < n and 0 <= d < n):
                raise ValueError(f"link {s}->{d} references an unknown node")
            if not 0 <= lqi <= 255:
                raise ValueError(f"lqi {lqi} on {s}->{d} outside [0, 255]")
            succ[s].append(d)
            pred[d].append(s)
        for v in range(n):
            succ[v].sort()
            pred[v].sort()
        self._succ = succ
        self._pred = pred

    @property
    def n_nodes(self) -> int:
        return len(self.positions)

    @property
    def nodes(self) -> List[Tuple[int, Tuple[float, float]]]:
        return list(enumerate(self.positions))

    @property
    def sources(self) -> List[int]:
        """Non-sink node ids in ascending order (one flow each)."""
        return [v for v in range(self.n_nodes) if v != self.sink]

    def successors(self, v: int) -> List[int]:
        return self._succ[v]

    def predecessors(self, v: int) -> List[int]:
        return self._pred[v]

    def lqi(self, src: int, dst: int) -> int:
        return self.links[(src, dst)]

    def link(self, src: int, dst: int) -> DirectedLink:
        return DirectedLink(src, dst, self.links[(src, dst)])

    def iter_links(self) -> Iterator[DirectedLink]:
        for (s, d) in sorted(self.links):
            yield DirectedLink(s, d, self.links[(s, d)])

    def distance(self, a: int, b: int) -> float:
        (xa, ya), (xb, yb) = self.positions[a], self.positions[b]
        return math.hypot(xa - xb, ya - yb)

    def to_dict(self) -> dict:
        return {
            "area_side": self.area_side,
            "range": self.range,
            "sink": self.sink,
            "nodes": [{"id": i, "x": x, "y": y} for i, (x, y) in enumerate(self.positions)],
            "links": [{"src": l.src, "dst": l.dst, "lqi": l.lqi} for l in self.iter_links()],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Topology":
        nodes = sorted(doc["nodes"], key=lambda nd: nd["id"])
        if [nd["id"] for nd in nodes] != list(range(len(nodes))):
            raise ValueError("node ids must be 0..n-1")
        return cls(
            positions=[(float(nd["x"]), float(nd["y"])) for nd in nodes],
            links={(int(l["src"]), int(l["dst"])): int(l["lqi"]) for l in doc["links"]},
            area_side=float(doc["area_side"]),
            range=float(doc["range"]),
            sink=int(doc["sink"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Topology":
        return cls.from_dict(json.loads(text))


def hop_distances(t: Topology) -> Dict[int, int]:
    """BFS hop count from every node that can reach the sink."""
    dist = {t.sink: 0}
    queue = deque([t.sink])
    while queue:
        v = queue.popleft()
        for u in t.predecessors(v):
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def is_connected(t: Topology) -> bool:
    """True iff every non-sink node has a directed path to the sink."""
    return len(hop_distances(t)) == t.n_nodes


def _place_nodes(n: int, area_side: float, rng: np.random.Generator) -> List[Tuple[float, float]]:
    centre = area_side / 2.0
    std = area_side / 4.0
    positions = [(centre, centre)]
    while len(positions) < n:
        x, y = rng.normal(centre, std, size=2)
        if 0.0 <= x <= area_side and 0.0 <= y <= area_side:
            positions.append((float(x), float(y)))
    return positions


def _build_links(positions, range_: float, params: LqiModelParams,
                 rng: np.random.Generator) -> Dict[Tuple[int, int], int]:
    links = {}
    n = len(positions)
    for s in range(n):
        xs, ys = positions[s]
        for d in range(s + 1, n):
            xd, yd = positions[d]
            dist = math.hypot(xs - xd, ys - yd)
            if dist > range_:
                continue
            fwd, back = rng.normal(0.0, params.sigma, size=2) if params.sigma > 0 else (0.0, 0.0)
            links[(s, d)] = lqi_model(dist, range_, params, float(fwd))
            links[(d, s)] = lqi_model(dist, range_, params, float(back))
    return links


def generate_topology(n: int, area_side: float = 50.0, range_: float = 15.0,
                      lqi_params: Optional[LqiModelParams] = None, seed: int = 0,
                      max_attempts: int = MAX_ATTEMPTS) -> Topology:
    """Draw a sink-connected random topology, resampling the whole placement
    until every node reaches the sink.

    Raises GenerationFailed after ``max_attempts`` disconnected placements.
    """
    if n < 2:
        raise ValueError("need at least 2 nodes")
    if area_side <= 0 or range_ <= 0:
        raise ValueError("area_side and range must be positive")
    params = lqi_params or LqiModelParams()
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        positions = _place_nodes(n, area_side, rng)
        links = _build_links(positions, range_, params, rng)
        topo = Topology(positions=positions, links=links, area_side=area_side, range=range_)
        if is_connected(topo):
            return topo
    raise GenerationFailed(
        f"no sink-connected placement of {n} nodes in {area_side}x{area_side} "
        f"with range {range_} after {max_attempts} attempts; increase the range"
    )
