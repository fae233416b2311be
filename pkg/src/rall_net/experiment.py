"""Batch experiment grid: topologies x seeds x algorithms, then aggregation.

Every cell is a pure function of the config, so serial and parallel runs
produce identical files.
"""

from __future__ import annotations

import csv
import io
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Sequence, Tuple

from .config import ExperimentConfig
from .exceptions import RallNetError
from .metrics import BUCKET_MS, CSV_COLUMNS, build_report
from .routing import ALGORITHMS, RoutingTable, route
from .simulator import run_simulation
from .topology import Topology, generate_topology

METRICS = ("loss_rate", "jain", "mean_latency", "avg_path_len", "lifetime_s", "control_overhead")
Z95 = 1.959963984540054

FIGURES = {
    "loss": ("loss_rate", "Packet loss rate"),
    "jain": ("jain", "Jain fairness index"),
    "path_length": ("avg_path_len", "Average path length (hops)"),
    "lifetime": ("lifetime_s", "Network lifetime (s)"),
    "overhead": ("control_overhead", "Control packets per delivered data packet"),
}


@dataclass
class RunOutput:
    row: Dict[str, str]
    histogram: List[int]
    bottleneck: int


@dataclass
class GridResult:
    runs: List[RunOutput] = field(default_factory=list)
    failures: List[Tuple[int, int, str, str]] = field(default_factory=list)

    @property
    def rows(self) -> List[Dict[str, str]]:
        return [r.row for r in self.runs]


def topology_id(n: int, index: int) -> str:
    return f"n{n}_t{index:02d}"


def make_topology(cfg: ExperimentConfig, n: int, index: int) -> Topology:
    return generate_topology(n, cfg.area_side, cfg.range, cfg.lqi_model, cfg.topology_seed(n, index))


def route_for(cfg: ExperimentConfig, topology: Topology, algorithm: str) -> RoutingTable:
    return route(topology, algorithm, cfg.costs, cfg.flow_ordering, cfg.bpr_k)


def run_cell(cfg: ExperimentConfig, n: int, index: int, algorithm: str) -> List[RunOutput]:
    """All seeds of one (node count, topology, algorithm) cell."""
    topo = make_topology(cfg, n, index)
    table = route_for(cfg, topo, algorithm)
    out = []
    for k in range(cfg.seeds_per_topology):
        seed = cfg.sim_seed(n, index, k)
        result = run_simulation(topo, table, replace(cfg.sim, seed=seed))
        report = build_report(table, result, topo.n_nodes, topo.sink, cfg.jain_from)
        out.append(RunOutput(report.csv_row(topology_id(n, index), seed, algorithm, n),
                             report.latency_histogram, report.bottleneck))
    return out


def _cell_job(args):
    cfg, n, index, algorithm = args
    try:
        return args[1:], run_cell(cfg, n, index, algorithm), None
    except RallNetError as exc:
        return args[1:], [], f"{type(exc).__name__}: {exc}"


def cells(cfg: ExperimentConfig) -> List[Tuple[int, int, str]]:
    return [(n, i, a) for n in cfg.node_counts for i in range(cfg.topologies_per_count)
            for a in cfg.algorithms]


def run_grid(cfg: ExperimentConfig, parallel: int = 1) -> GridResult:
    jobs = [(cfg, n, i, a) for n, i, a in cells(cfg)]
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_cell_job, jobs, chunksize=1))
    else:
        results = [_cell_job(j) for j in jobs]
    algo_rank = {a: i for i, a in enumerate(ALGORITHMS)}
    results.sort(key=lambda r: (r[0][0], r[0][1], algo_rank[r[0][2]]))
    grid = GridResult()
    for (n, i, a), outs, err in results:
        if err is not None:
            grid.failures.append((n, i, a, err))
        grid.runs.extend(outs)
    return grid


def _numbers(values: Sequence[str]) -> List[float]:
    out = []
    for v in values:
        try:
            x = float(v)
        except ValueError:
            continue
        if math.isfinite(x):
            out.append(x)
    return out


def mean_ci(xs: Sequence[float]) -> Tuple[float, float]:
    """Mean and half-width of the 95% normal-approximation interval."""
    m = math.fsum(xs) / len(xs)
    if len(xs) < 2:
        return m, 0.0
    return m, Z95 * statistics.stdev(xs) / math.sqrt(len(xs))


def aggregate(rows: Sequence[Dict[str, str]]) -> List[Dict[str, str]]:
    groups: Dict[Tuple[int, str], List[Dict[str, str]]] = {}
    for r in rows:
        groups.setdefault((int(r["n_nodes"]), r["algorithm"]), []).append(r)
    algo_rank = {a: i for i, a in enumerate(ALGORITHMS)}
    out = []
    for (n, algo) in sorted(groups, key=lambda k: (k[0], algo_rank.get(k[1], 99), k[1])):
        grp = sorted(groups[(n, algo)], key=lambda r: (r["topology_id"], r["seed"]))
        row = {"n_nodes": str(n), "algorithm": algo, "runs": str(len(grp))}
        for m in METRICS:
            xs = _numbers([r[m] for r in grp])
            if xs:
                mean, ci = mean_ci(xs)
                row[f"{m}_mean"], row[f"{m}_ci95"] = repr(mean), repr(ci)
            else:
                row[f"{m}_mean"], row[f"{m}_ci95"] = "", ""
            row[f"{m}_n"] = str(len(xs))
        out.append(row)
    return out


def aggregate_columns() -> List[str]:
    cols = ["n_nodes", "algorithm", "runs"]
    for m in METRICS:
        cols += [f"{m}_mean", f"{m}_ci95", f"{m}_n"]
    return cols


def latency_rows(runs: Sequence[RunOutput]) -> List[Dict[str, str]]:
    totals: Dict[Tuple[int, str], List[int]] = {}
    for r in runs:
        key = (int(r.row["n_nodes"]), r.row["algorithm"])
        acc = totals.setdefault(key, [])
        for k, c in enumerate(r.histogram):
            if k >= len(acc):
                acc.append(0)
            acc[k] += c
    algo_rank = {a: i for i, a in enumerate(ALGORITHMS)}
    rows = []
    for (n, algo) in sorted(totals, key=lambda k: (k[0], algo_rank.get(k[1], 99))):
        counts = totals[(n, algo)]
        total = sum(counts)
        for k, c in enumerate(counts):
            rows.append({"n_nodes": str(n), "algorithm": algo, "bucket_start_ms": str(k * BUCKET_MS),
                         "count": str(c), "fraction": repr(c / total) if total else "0.0"})
    return rows


LATENCY_COLUMNS = ["n_nodes", "algorithm", "bucket_start_ms", "count", "fraction"]


def to_csv(rows: Sequence[Dict[str, str]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def plot_scripts(algorithms: Sequence[str], node_counts: Sequence[int]) -> Dict[str, str]:
    """Gnuplot scripts, one per figure, for the plots/ directory beside the CSVs."""
    algos = " ".join(algorithms)
    head = ('set datafile separator ","\nset datafile columnheaders\n'
            'set key outside right\nset grid\n'
            f'ALGOS = "{algos}"\n')
    scripts = {}
    for name, (metric, label) in FIGURES.items():
        scripts[f"{name}.gp"] = (
            head
            + f'set terminal pngcairo size 800,500\nset output "{name}.png"\n'
            + f'set xlabel "Number of nodes"\nset ylabel "{label}"\n'
            + "plot for [a in ALGOS] '../aggregate.csv' using "
            + f'(strcol("algorithm") eq a ? column("n_nodes") : NaN):(column("{metric}_mean")):'
            + f'(column("{metric}_ci95")) with yerrorlines title a\n'
        )
    n = max(node_counts)
    scripts["latency.gp"] = (
        head
        + 'set terminal pngcairo size 800,500\nset output "latency.png"\n'
        + f'set xlabel "Latency bucket start (ms), {n} nodes"\nset ylabel "Fraction of delivered packets"\n'
        + "plot for [a in ALGOS] '../latency_hist.csv' using "
        + f'(strcol("algorithm") eq a && column("n_nodes") == {n} ? column("bucket_start_ms") : NaN):'
        + '(column("fraction")) with linespoints title a\n'
    )
    return scripts


def write_outputs(grid: GridResult, cfg: ExperimentConfig, out_dir: str) -> Dict[str, str]:
    os.makedirs(os.path.join(out_dir, "plots"), exist_ok=True)
    files = {
        "runs.csv": to_csv(grid.rows, CSV_COLUMNS),
        "aggregate.csv": to_csv(aggregate(grid.rows), aggregate_columns()),
        "latency_hist.csv": to_csv(latency_rows(grid.runs), LATENCY_COLUMNS),
    }
    for name, text in plot_scripts(cfg.algorithms, cfg.node_counts).items():
        files[os.path.join("plots", name)] = text
    if grid.failures:
        files["failures.txt"] = "".join(f"{topology_id(n, i)} {a}: {msg}\n"
                                        for n, i, a, msg in grid.failures)
    for rel, text in files.items():
        with open(os.path.join(out_dir, rel), "w", newline="") as fh:
            fh.write(text)
    return files
