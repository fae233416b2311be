"""Experiment configuration and deterministic seed derivation.

A config file is TOML; every key is optional and falls back to the
defaults below::

    seed = 1                          # master seed (RALL_NET_SEED overrides)
    node_counts = [10, 20, 30, 40, 50]
    topologies_per_count = 10
    seeds_per_topology = 4
    algorithms = ["rall", "balanced_lqi", "bpr", "path", "lqi"]
    area_side = 50.0                  # m
    range = 15.0                      # m
    bpr_k = 5
    ordering = "nearest_first"        # nearest_first | farthest_first | node_id
    jain_from = "routing"             # routing | simulated

    [lqi_model]
    gamma = 1.5
    sigma = 12.0

    [costs]
    w_p = 0.5
    w_l = 0.5
    th_lqi = 220
    # p_const defaults to the node count

    [sim]                             # any SimConfig field except seed
    gen_rate = 5.0                    # packets/minute
    duration = 600.0                  # s
    initial_energy = 100.0            # J
    tx_energy = 0.020                 # J/packet
    rx_energy = 0.010                 # J/packet
    packet_size = 127                 # bytes
    link_rate = 250000.0              # bit/s
    max_retries = 3
    contention_delay_per_load = 0.050 # s
    control_packets_per_hop = 1.0
    alpha = 0.5
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Sequence, Tuple

import tomli

from .costs import CostParams
from .routing import ALGORITHMS, FlowOrdering
from .simulator import SimConfig
from .topology import LqiModelParams

SEED_ENV = "RALL_NET_SEED"
_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def derive_seed(master: int, *indices: int) -> int:
    """Stable 64-bit child seed of ``master`` for an index tuple."""
    h = splitmix64(master & _MASK)
    for i in indices:
        h = splitmix64(h ^ splitmix64(i & _MASK))
    return h


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 1
    node_counts: Tuple[int, ...] = (10, 20, 30, 40, 50)
    topologies_per_count: int = 10
    seeds_per_topology: int = 4
    algorithms: Tuple[str, ...] = ALGORITHMS
    area_side: float = 50.0
    range: float = 15.0
    bpr_k: int = 5
    ordering: str = "nearest_first"
    jain_from: str = "routing"
    lqi_model: LqiModelParams = field(default_factory=LqiModelParams)
    costs: CostParams = field(default_factory=CostParams)
    sim: SimConfig = field(default_factory=SimConfig)

    def __post_init__(self):
        object.__setattr__(self, "node_counts", tuple(int(n) for n in self.node_counts))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if not self.node_counts or min(self.node_counts) < 2:
            raise ValueError("node_counts must be non-empty and each >= 2")
        if self.topologies_per_count < 1 or self.seeds_per_topology < 1:
            raise ValueError("topologies_per_count and seeds_per_topology must be >= 1")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown or not self.algorithms:
            raise ValueError(f"unknown algorithms {unknown}; choose from {', '.join(ALGORITHMS)}")
        FlowOrdering(self.ordering)

    @property
    def flow_ordering(self) -> FlowOrdering:
        return FlowOrdering(self.ordering)

    def topology_seed(self, n: int, index: int) -> int:
        return derive_seed(self.seed, n, index)

    def sim_seed(self, n: int, index: int, seed_index: int) -> int:
        return derive_seed(self.topology_seed(n, index), seed_index)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _section(cls, doc: dict, name: str):
    known = {f.name for f in fields(cls)}
    extra = set(doc) - known
    if extra:
        raise ValueError(f"unknown keys in [{name}]: {sorted(extra)}")
    return cls(**doc)


def config_from_dict(doc: dict) -> ExperimentConfig:
    doc = dict(doc)
    sections = {}
    if "lqi_model" in doc:
        sections["lqi_model"] = _section(LqiModelParams, doc.pop("lqi_model"), "lqi_model")
    if "costs" in doc:
        sections["costs"] = _section(CostParams, doc.pop("costs"), "costs")
    if "sim" in doc:
        sim = doc.pop("sim")
        if "seed" in sim:
            raise ValueError("[sim] seed is derived from the master seed; set the top-level seed")
        sections["sim"] = _section(SimConfig, sim, "sim")
    top = {f.name for f in fields(ExperimentConfig)} - set(sections)
    extra = set(doc) - top
    if extra:
        raise ValueError(f"unknown config keys: {sorted(extra)}")
    return ExperimentConfig(**doc, **sections)


def load_config(path: Optional[str] = None, seed: Optional[int] = None) -> ExperimentConfig:
    """Read a TOML file (or defaults), then apply RALL_NET_SEED and ``seed``."""
    if path:
        with open(path, "rb") as fh:
            cfg = config_from_dict(tomli.load(fh))
    else:
        cfg = ExperimentConfig()
    env = os.environ.get(SEED_ENV)
    if env:
        cfg = replace(cfg, seed=int(env, 0))
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    return cfg


def parse_int_list(text: str) -> Sequence[int]:
    return [int(x) for x in text.split(",") if x.strip()]
