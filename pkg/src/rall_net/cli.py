"""Command-line driver: ``rall-net gen | route | simulate | compare``.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from typing import List, Optional

from .config import ExperimentConfig, load_config, parse_int_list
from .costs import CostParams
from .exceptions import RallNetError
from .experiment import make_topology, route_for, run_grid, to_csv, topology_id, write_outputs
from .metrics import CSV_COLUMNS, build_report
from .routing import ALGORITHMS
from .simulator import run_simulation
from .topology import Topology
from .validation import check_routes, check_topology

log = logging.getLogger("rall_net")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML experiment config")
    p.add_argument("--seed", type=lambda s: int(s, 0), help="master seed (u64)")
    p.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rall-net", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    g = sub.add_parser("gen", help="generate topology JSON files")
    _common(g)
    g.add_argument("--nodes", help="comma-separated node counts")

    r = sub.add_parser("route", help="compute a routing table for one topology")
    _common(r)
    r.add_argument("topology", help="topology JSON file")
    r.add_argument("--algo", required=True, help=f"one of {', '.join(ALGORITHMS)}")
    r.add_argument("--w-p", type=float)
    r.add_argument("--w-l", type=float)
    r.add_argument("--th-lqi", type=int)

    s = sub.add_parser("simulate", help="simulate traffic over a routing table")
    _common(s)
    s.add_argument("topology", help="topology JSON file")
    s.add_argument("routes", help="routing-table JSON file")
    s.add_argument("--gen-rate", type=float, help="packets per minute per node")
    s.add_argument("--duration", type=float, help="seconds")
    s.add_argument("--packets-csv", action="store_true", help="also write per-packet CSV")

    c = sub.add_parser("compare", help="run the full experiment grid")
    _common(c)
    c.add_argument("--algo", help="comma-separated algorithms")
    c.add_argument("--nodes", help="comma-separated node counts")
    c.add_argument("--parallel", type=int, default=1, help="worker processes")
    return parser


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config, args.seed)
    nodes = getattr(args, "nodes", None)
    if nodes:
        cfg = replace(cfg, node_counts=tuple(parse_int_list(nodes)))
    algo = getattr(args, "algo", None)
    if algo and args.command == "compare":
        cfg = replace(cfg, algorithms=tuple(a.strip() for a in algo.split(",")))
    return cfg


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def cmd_gen(args) -> int:
    cfg = _config(args)
    failed = 0
    for n in cfg.node_counts:
        for i in range(cfg.topologies_per_count):
            try:
                topo = make_topology(cfg, n, i)
            except RallNetError as exc:
                log.error("%s: %s", topology_id(n, i), exc)
                failed += 1
                continue
            _write(os.path.join(args.out, f"topo_{topology_id(n, i)}.json"), topo.to_json())
    return EXIT_RUNTIME if failed else EXIT_OK


def cmd_route(args) -> int:
    cfg = _config(args)
    if args.algo not in ALGORITHMS:
        raise UsageError(f"unknown algorithm {args.algo!r}; choose from {', '.join(ALGORITHMS)}")
    costs = cfg.costs
    if args.w_p is not None or args.w_l is not None or args.th_lqi is not None:
        w_p = args.w_p if args.w_p is not None else (1.0 - args.w_l if args.w_l is not None else costs.w_p)
        w_l = args.w_l if args.w_l is not None else 1.0 - w_p
        costs = CostParams(w_p, w_l, args.th_lqi if args.th_lqi is not None else costs.th_lqi,
                           costs.p_const)
    cfg = replace(cfg, costs=costs)
    topo = check_topology(Topology.from_json(_read(args.topology)))
    table = route_for(cfg, topo, args.algo)
    stem = os.path.splitext(os.path.basename(args.topology))[0]
    _write(os.path.join(args.out, f"{stem}.{args.algo}.routes.json"), table.to_json())
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args)
    sim = cfg.sim
    if args.gen_rate is not None:
        sim = replace(sim, gen_rate=args.gen_rate)
    if args.duration is not None:
        sim = replace(sim, duration=args.duration)
    sim = replace(sim, seed=cfg.seed)
    topo = check_topology(Topology.from_json(_read(args.topology)))
    table = check_routes(_read(args.routes), topo)
    result = run_simulation(topo, table, sim)
    report = build_report(table, result, topo.n_nodes, topo.sink, cfg.jain_from)
    stem = os.path.splitext(os.path.basename(args.routes))[0]
    if stem.endswith(".routes"):
        stem = stem[: -len(".routes")]
    _write(os.path.join(args.out, f"{stem}.result.json"), result.to_json())
    row = report.csv_row(os.path.splitext(os.path.basename(args.topology))[0], sim.seed,
                         table.algorithm, topo.n_nodes)
    _write(os.path.join(args.out, f"{stem}.metrics.csv"), to_csv([row], CSV_COLUMNS))
    _write(os.path.join(args.out, f"{stem}.metrics.json"), report.to_json())
    if args.packets_csv:
        _write(os.path.join(args.out, f"{stem}.packets.csv"), result.packets_csv())
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _config(args)
    if args.parallel < 1:
        raise UsageError("--parallel must be >= 1")
    grid = run_grid(cfg, parallel=args.parallel)
    write_outputs(grid, cfg, args.out)
    for n, i, a, msg in grid.failures:
        log.error("failed cell %s %s: %s", topology_id(n, i), a, msg)
    return EXIT_RUNTIME if grid.failures else EXIT_OK


COMMANDS = {"gen": cmd_gen, "route": cmd_route, "simulate": cmd_simulate, "compare": cmd_compare}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"rall-net: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RallNetError, OSError, KeyError) as exc:
        print(f"rall-net: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
