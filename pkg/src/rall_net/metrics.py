"""Evaluation metrics over routing tables and simulation results."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence

from .exceptions import NoTraffic, Undefined
from .routing import RoutingTable
from .simulator import SimResult

BUCKET_MS = 600
NO_TRAFFIC = "NoTraffic"

CSV_COLUMNS = ("topology_id", "seed", "algorithm", "n_nodes", "loss_rate", "jain",
               "mean_latency", "avg_path_len", "lifetime_s", "control_overhead")


def jain_index(loads: Sequence[float]) -> float:
    """Jain's fairness index (sum x)^2 / (n * sum x^2)."""
    xs = [float(x) for x in loads]
    if any(x < 0 for x in xs):
        raise ValueError("loads must be non-negative")
    sq = sum(x * x for x in xs)
    if not xs or sq == 0:
        raise Undefined("Jain index is undefined when every load is zero")
    return sum(xs) ** 2 / (len(xs) * sq)


def routing_loads(routes: RoutingTable, n_nodes: int, sink: int = 0) -> List[int]:
    """Per-node transit counts for every non-sink node, zeros included."""
    return [routes.node_loads.get(v, 0) for v in range(n_nodes) if v != sink]


def simulated_loads(result: SimResult, sink: int = 0) -> List[int]:
    return [c for v, c in sorted(result.tx_attempts.items()) if v != sink]


def _require_traffic(result: SimResult) -> None:
    if not result.packets:
        raise NoTraffic("no packet was generated")


def loss_rate(result: SimResult) -> float:
    _require_traffic(result)
    return result.dropped / len(result.packets)


def delivery_rate(result: SimResult) -> float:
    _require_traffic(result)
    return result.delivered / len(result.packets)


def latency_histogram(result: SimResult, bucket_ms: float = BUCKET_MS) -> List[int]:
    """Counts of delivered packets in half-open buckets [k*w, (k+1)*w) ms."""
    counts: List[int] = []
    for p in result.packets:
        if p.delivered_at is None:
            continue
        k = int(math.floor(p.latency * 1000.0 / bucket_ms))
        if k >= len(counts):
            counts.extend([0] * (k + 1 - len(counts)))
        counts[k] += 1
    return counts


def mean_latency(result: SimResult) -> float:
    lat = [p.latency for p in result.packets if p.delivered_at is not None]
    if not lat:
        raise NoTraffic("no packet was delivered")
    return sum(lat) / len(lat)


def avg_path_length(routes: RoutingTable) -> float:
    return sum(p.hop_count for p in routes.paths.values()) / len(routes.paths)


def control_overhead(result: SimResult) -> float:
    """Control packets per delivered data packet."""
    _require_traffic(result)
    delivered = result.delivered
    if delivered == 0:
        return math.inf
    return result.control_packet_count / delivered


@dataclass
class MetricsReport:
    loss_rate: Optional[float]
    jain_index: float
    latency_histogram: List[int]
    avg_path_length: float
    lifetime: Optional[float]
    control_overhead: Optional[float]
    mean_latency: Optional[float]
    bottleneck: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1)

    def csv_row(self, topology_id, seed, algorithm: str, n_nodes: int) -> Dict[str, str]:
        def fmt(x):
            return NO_TRAFFIC if x is None else repr(float(x))

        return {
            "topology_id": str(topology_id),
            "seed": str(seed),
            "algorithm": algorithm,
            "n_nodes": str(n_nodes),
            "loss_rate": fmt(self.loss_rate),
            "jain": repr(self.jain_index),
            "mean_latency": fmt(self.mean_latency),
            "avg_path_len": repr(self.avg_path_length),
            "lifetime_s": "" if self.lifetime is None else repr(self.lifetime),
            "control_overhead": fmt(self.control_overhead),
        }


def build_report(routes: RoutingTable, result: SimResult, n_nodes: int, sink: int = 0,
                 jain_from: str = "routing") -> MetricsReport:
    """Collect every metric; traffic-dependent fields are None without traffic.

    ``jain_from`` selects routing-time loads (``"routing"``) or simulated
    per-node transmission counts (``"simulated"``).
    """
    if jain_from == "routing":
        jain = jain_index(routing_loads(routes, n_nodes, sink))
    elif jain_from == "simulated":
        jain = jain_index(simulated_loads(result, sink))
    else:
        raise ValueError(f"jain_from must be 'routing' or 'simulated', not {jain_from!r}")
    has_traffic = bool(result.packets)
    delivered = result.delivered if has_traffic else 0
    return MetricsReport(
        loss_rate=loss_rate(result) if has_traffic else None,
        jain_index=jain,
        latency_histogram=latency_histogram(result),
        avg_path_length=avg_path_length(routes),
        lifetime=result.lifetime,
        control_overhead=control_overhead(result) if has_traffic else None,
        mean_latency=mean_latency(result) if delivered else None,
        bottleneck=routes.bottleneck,
    )
