"""Discrete-event simulation of many-to-one data traffic over fixed routes.

Each non-sink node emits packets as a Poisson process and forwards them
along its routing-table path. A hop is attempted up to ``max_retries``
times, each attempt succeeding with probability ``(lqi/255) ** alpha``.
A hop occupies the sender for ``contention_delay_per_load * load(receiver)``
plus one frame time per attempt; relays serve packets FIFO. Senders pay
``tx_energy`` per attempt and receivers ``rx_energy`` per reception; a
non-sink node with no energy left dies and drops everything it holds.

Packets are generated during ``[0, duration)``; packets still in flight at
that point are drained so that every record ends delivered or dropped.
"""

from __future__ import annotations

import csv
import heapq
import io
import json
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Deque, Dict, List, Optional

import numpy as np

from .routing import RoutingTable
from .topology import Topology

LINK_LOSS = "LinkLoss"
DEAD_NODE = "DeadNode"
RETRY_EXHAUSTED = "RetryExhausted"

_GEN, _SEND, _ARRIVE = 0, 1, 2


@dataclass(frozen=True)
class SimConfig:
    gen_rate: float = 5.0                   # packets per minute per node
    duration: float = 600.0                 # s, traffic generation window
    initial_energy: float = 100.0           # J
    tx_energy: float = 0.020                # J per transmission attempt
    rx_energy: float = 0.010                # J per received packet
    packet_size: int = 127                  # bytes
    link_rate: float = 250_000.0            # bit/s
    max_retries: int = 3                    # transmission attempts per hop, >= 1
    contention_delay_per_load: float = 0.050  # s per unit of receiver load
    control_packets_per_hop: float = 1.0    # per transmission attempt
    alpha: float = 0.5                      # loss-model exponent
    seed: int = 0

    def __post_init__(self):
        if self.gen_rate < 0:
            raise ValueError("gen_rate must be >= 0")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        for name in ("initial_energy", "tx_energy", "rx_energy", "packet_size", "link_rate", "alpha"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_retries < 1:
            raise ValueError("max_retries counts attempts and must be >= 1")
        if self.contention_delay_per_load < 0 or self.control_packets_per_hop < 0:
            raise ValueError("contention and control rates must be >= 0")

    @property
    def frame_time(self) -> float:
        return self.packet_size * 8 / self.link_rate


@dataclass(slots=True)
class PacketRecord:
    source: int
    created_at: float
    delivered_at: Optional[float] = None
    hops_traversed: int = 0
    retransmissions: int = 0
    attempts: int = 0
    dropped_reason: Optional[str] = None

    @property
    def latency(self) -> Optional[float]:
        return None if self.delivered_at is None else self.delivered_at - self.created_at


@dataclass
class NodeState:
    energy_remaining: float
    queue: Deque[int] = field(default_factory=deque)
    alive: bool = True
    busy: bool = False


@dataclass
class SimResult:
    packets: List[PacketRecord]
    node_energy_trace: Dict[int, float]
    lifetime: Optional[float]
    control_packet_count: float
    data_tx_count: int
    tx_attempts: Dict[int, int] = field(default_factory=dict)
    rx_count: Dict[int, int] = field(default_factory=dict)
    death_times: Dict[int, float] = field(default_factory=dict)

    @property
    def delivered(self) -> int:
        return sum(1 for p in self.packets if p.delivered_at is not None)

    @property
    def dropped(self) -> int:
        return sum(1 for p in self.packets if p.dropped_reason is not None)

    def to_dict(self) -> dict:
        return {
            "packets": [asdict(p) for p in self.packets],
            "node_energy_trace": {str(k): v for k, v in sorted(self.node_energy_trace.items())},
            "lifetime": self.lifetime,
            "control_packet_count": self.control_packet_count,
            "data_tx_count": self.data_tx_count,
            "tx_attempts": {str(k): v for k, v in sorted(self.tx_attempts.items())},
            "rx_count": {str(k): v for k, v in sorted(self.rx_count.items())},
            "death_times": {str(k): v for k, v in sorted(self.death_times.items())},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SimResult":
        ints = lambda m: {int(k): v for k, v in m.items()}  # noqa: E731
        return cls(
            packets=[PacketRecord(**p) for p in doc["packets"]],
            node_energy_trace=ints(doc["node_energy_trace"]),
            lifetime=doc["lifetime"],
            control_packet_count=doc["control_packet_count"],
            data_tx_count=doc["data_tx_count"],
            tx_attempts=ints(doc.get("tx_attempts", {})),
            rx_count=ints(doc.get("rx_count", {})),
            death_times=ints(doc.get("death_times", {})),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def packets_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["source", "created_at", "delivered_at", "hops", "retries", "drop_reason"])
        for p in self.packets:
            w.writerow([p.source, repr(p.created_at),
                        "" if p.delivered_at is None else repr(p.delivered_at),
                        p.hops_traversed, p.retransmissions, p.dropped_reason or ""])
        return buf.getvalue()


def hop_success_probability(lqi: int, alpha: float = 0.5) -> float:
    if not 0 <= lqi <= 255:
        raise ValueError(f"lqi {lqi} outside [0, 255]")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return (lqi / 255.0) ** alpha


def lifetime(result: SimResult) -> Optional[float]:
    """Time of the first node death, None if every node survived."""
    return min(result.death_times.values(), default=None)


def _arrival_times(n_nodes: int, sink: int, cfg: SimConfig, rng: np.random.Generator):
    rate = cfg.gen_rate / 60.0
    times: Dict[int, List[float]] = {}
    for v in range(n_nodes):
        if v == sink or rate == 0:
            continue
        ts, t = [], 0.0
        while True:
            t += float(rng.exponential(1.0 / rate))
            if t >= cfg.duration:
                break
            ts.append(t)
        times[v] = ts
    return times


def run_simulation(topology: Topology, routes: RoutingTable, config: SimConfig = SimConfig(),
                   traffic: Optional[Dict[int, List[float]]] = None) -> SimResult:
    """Simulate data traffic over fixed routes; deterministic for a fixed ``config.seed``.

    ``traffic`` optionally replaces the Poisson sources with explicit packet
    creation times per node (sorted, within ``[0, duration)``).
    """
    routes.check_covers(topology)
    cfg = config
    sink = topology.sink
    gen_ss, loss_ss = np.random.SeedSequence(cfg.seed).spawn(2)
    loss_rng = np.random.default_rng(loss_ss)
    if traffic is None:
        arrivals = _arrival_times(topology.n_nodes, sink, cfg, np.random.default_rng(gen_ss))
    else:
        arrivals = {v: sorted(float(t) for t in ts if 0 <= t < cfg.duration)
                    for v, ts in traffic.items() if v != sink}

    frame = cfg.frame_time
    route_nodes = {s: p.nodes for s, p in routes.paths.items()}
    success_p = {e: hop_success_probability(lqi, cfg.alpha) for e, lqi in topology.links.items()}
    recv_load = {v: routes.node_loads.get(v, 0) for v in range(topology.n_nodes)}

    nodes = {v: NodeState(cfg.initial_energy) for v in range(topology.n_nodes)}
    tx_attempts = {v: 0 for v in range(topology.n_nodes)}
    rx_count = {v: 0 for v in range(topology.n_nodes)}
    death_times: Dict[int, float] = {}
    packets: List[PacketRecord] = []
    position: List[int] = []      # index into the packet's route of its current holder
    control = 0.0
    data_tx = 0

    events: list = []
    counter = 0

    def push(t: float, kind: int, a: int, b: int = -1) -> None:
        nonlocal counter
        heapq.heappush(events, (t, counter, kind, a, b))
        counter += 1

    for v, ts in arrivals.items():
        if ts:
            push(ts[0], _GEN, v, 0)

    def settle(v: int) -> None:
        # recomputed from counters so the energy ledger holds exactly
        nodes[v].energy_remaining = (cfg.initial_energy - cfg.tx_energy * tx_attempts[v]
                                     - cfg.rx_energy * rx_count[v])

    def drop(pid: int, reason: str) -> None:
        packets[pid].dropped_reason = reason

    def kill(v: int, t: float) -> None:
        st = nodes[v]
        st.alive = False
        death_times[v] = t
        while st.queue:
            drop(st.queue.popleft(), DEAD_NODE)

    def start_service(v: int, t: float) -> None:
        nonlocal control, data_tx
        st = nodes[v]
        while st.queue and st.alive:
            pid = st.queue.popleft()
            rec = packets[pid]
            path = route_nodes[rec.source]
            nxt = path[position[pid] + 1]
            if not nodes[nxt].alive:
                drop(pid, DEAD_NODE)
                continue
            p = success_p[(v, nxt)]
            attempts, ok = 0, False
            while attempts < cfg.max_retries:
                attempts += 1
                tx_attempts[v] += 1
                settle(v)
                ok = loss_rng.random() < p
                if ok or (v != sink and st.energy_remaining <= 0):
                    break
            data_tx += attempts
            control += cfg.control_packets_per_hop * attempts
            rec.attempts += attempts
            rec.retransmissions += attempts - 1
            busy_for = cfg.contention_delay_per_load * recv_load[nxt] + attempts * frame
            st.busy = True
            if ok:
                push(t + busy_for, _ARRIVE, pid, nxt)
            elif v != sink and st.energy_remaining <= 0:
                drop(pid, DEAD_NODE)
            else:
                drop(pid, LINK_LOSS if cfg.max_retries == 1 else RETRY_EXHAUSTED)
            if v != sink and st.energy_remaining <= 0:
                kill(v, t)
                return
            push(t + busy_for, _SEND, v)
            return
        st.busy = False

    def enqueue(v: int, pid: int, t: float) -> None:
        st = nodes[v]
        st.queue.append(pid)
        if not st.busy:
            start_service(v, t)

    while events:
        t, _, kind, a, b = heapq.heappop(events)
        if kind == _GEN:
            v, k = a, b
            if not nodes[v].alive:
                continue
            pid = len(packets)
            packets.append(PacketRecord(source=v, created_at=t))
            position.append(0)
            ts = arrivals[v]
            if k + 1 < len(ts):
                push(ts[k + 1], _GEN, v, k + 1)
            enqueue(v, pid, t)
        elif kind == _SEND:
            nodes[a].busy = False
            start_service(a, t)
        else:
            pid, v = a, b
            rec = packets[pid]
            st = nodes[v]
            if not st.alive:
                drop(pid, DEAD_NODE)
                continue
            rx_count[v] += 1
            settle(v)
            rec.hops_traversed += 1
            position[pid] += 1
            if v == sink:
                rec.delivered_at = t
            elif st.energy_remaining <= 0:
                drop(pid, DEAD_NODE)
                kill(v, t)
            else:
                enqueue(v, pid, t)

    return SimResult(
        packets=packets,
        node_energy_trace={v: st.energy_remaining for v, st in nodes.items()},
        lifetime=min(death_times.values(), default=None),
        control_packet_count=control,
        data_tx_count=data_tx,
        tx_attempts=tx_attempts,
        rx_count=rx_count,
        death_times=death_times,
    )
