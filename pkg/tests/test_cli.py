import csv
import io
import json
import re

import pytest

from rall_net.cli import main
from rall_net.config import SEED_ENV
from rall_net.experiment import LATENCY_COLUMNS, aggregate_columns, plot_scripts
from rall_net.routing import RoutingTable
from rall_net.topology import Topology

from conftest import both_ways, make_topo


@pytest.fixture(autouse=True)
def no_env_seed(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)


def read(path):
    return path.read_bytes()


def test_gen_defaults(tmp_path):
    assert main(["gen", "--out", str(tmp_path)]) == 0
    files = sorted(tmp_path.glob("topo_*.json"))
    assert len(files) == 50
    t = Topology.from_json(files[0].read_text())
    assert t.n_nodes in (10, 20, 30, 40, 50)


def test_gen_repeatable(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["gen", "--nodes", "10,20", "--seed", "7", "--out", str(a)]) == 0
    assert main(["gen", "--nodes", "10,20", "--seed", "7", "--out", str(b)]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir()) and len(names) == 20
    assert all(read(a / n) == read(b / n) for n in names)


def test_gen_env_seed(tmp_path, monkeypatch):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["gen", "--nodes", "10", "--seed", "5", "--out", str(a)])
    monkeypatch.setenv(SEED_ENV, "5")
    main(["gen", "--nodes", "10", "--out", str(b)])
    assert read(a / "topo_n10_t00.json") == read(b / "topo_n10_t00.json")


def test_gen_two_nodes(tmp_path):
    assert main(["gen", "--nodes", "2", "--out", str(tmp_path)]) == 0
    t = Topology.from_json((tmp_path / "topo_n2_t00.json").read_text())
    assert t.n_nodes == 2


def write_topo(tmp_path, topo, name="star.json"):
    p = tmp_path / name
    p.write_text(topo.to_json())
    return p


def test_route_star(tmp_path, star5):
    p = write_topo(tmp_path, star5)
    assert main(["route", str(p), "--algo", "path", "--out", str(tmp_path)]) == 0
    out = tmp_path / "star.path.routes.json"
    table = RoutingTable.from_json(out.read_text())
    assert all(path.hop_count == 1 for path in table.paths.values())
    first = read(out)
    main(["route", str(p), "--algo", "path", "--out", str(tmp_path)])
    assert read(out) == first


def test_route_reduction(tmp_path):
    # a 5-cycle through the sink: every node has a unique shortest path
    pairs = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]
    p = write_topo(tmp_path, make_topo(both_ways(pairs, lqi=90)), "g.json")
    assert main(["route", str(p), "--algo", "rall", "--w-p", "1", "--w-l", "0",
                 "--out", str(tmp_path)]) == 0
    main(["route", str(p), "--algo", "path", "--out", str(tmp_path)])
    rall_t = RoutingTable.from_json((tmp_path / "g.rall.routes.json").read_text())
    path_t = RoutingTable.from_json((tmp_path / "g.path.routes.json").read_text())
    assert rall_t.node_sequences() == path_t.node_sequences()


def test_simulate(tmp_path):
    p = write_topo(tmp_path, make_topo(both_ways([(0, 1)])), "two.json")
    main(["route", str(p), "--algo", "path", "--out", str(tmp_path)])
    routes = tmp_path / "two.path.routes.json"
    args = ["simulate", str(p), str(routes), "--seed", "3", "--packets-csv", "--out", str(tmp_path)]
    assert main(args) == 0
    row = next(csv.DictReader(io.StringIO((tmp_path / "two.path.metrics.csv").read_text())))
    assert row["loss_rate"] == "0.0"
    first = read(tmp_path / "two.path.metrics.csv")
    main(args)
    assert read(tmp_path / "two.path.metrics.csv") == first
    assert (tmp_path / "two.path.packets.csv").exists()
    assert json.loads((tmp_path / "two.path.result.json").read_text())["lifetime"] is None


def test_simulate_no_traffic(tmp_path, star5):
    p = write_topo(tmp_path, star5)
    main(["route", str(p), "--algo", "rall", "--out", str(tmp_path)])
    assert main(["simulate", str(p), str(tmp_path / "star.rall.routes.json"), "--gen-rate", "0",
                 "--out", str(tmp_path)]) == 0
    row = next(csv.DictReader(io.StringIO((tmp_path / "star.rall.metrics.csv").read_text())))
    assert row["loss_rate"] == "NoTraffic"


def test_exit_codes(tmp_path, star5, capsys):
    p = write_topo(tmp_path, star5)
    assert main(["route", str(p), "--algo", "ospf"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["route"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 1
    assert main(["route", str(tmp_path / "missing.json"), "--algo", "path"]) == 2
    broken = write_topo(tmp_path, make_topo({(0, 1): 200, (1, 2): 200, (2, 1): 200}), "cut.json")
    assert main(["route", str(broken), "--algo", "path", "--out", str(tmp_path)]) == 2


def test_simulate_incomplete_routes(tmp_path, line4):
    p = write_topo(tmp_path, line4, "line.json")
    main(["route", str(p), "--algo", "path", "--out", str(tmp_path)])
    doc = json.loads((tmp_path / "line.path.routes.json").read_text())
    doc["paths"].pop("3")
    del doc["node_loads"], doc["edge_flows"]
    bad = tmp_path / "bad.routes.json"
    bad.write_text(json.dumps(doc))
    assert main(["simulate", str(p), str(bad), "--out", str(tmp_path)]) == 2


def test_compare_single_cell(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("topologies_per_count = 1\nseeds_per_topology = 1\n[sim]\nduration = 60.0\n")
    assert main(["compare", "--config", str(cfg), "--algo", "rall", "--nodes", "10",
                 "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "runs.csv").read_text())))
    assert len(rows) == 1 and rows[0]["algorithm"] == "rall"


@pytest.mark.slow
def test_compare_path_defaults(tmp_path):
    assert main(["compare", "--algo", "path", "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(io.StringIO((tmp_path / "runs.csv").read_text())))
    assert len(rows) == 200
    agg = list(csv.DictReader(io.StringIO((tmp_path / "aggregate.csv").read_text())))
    assert [r["runs"] for r in agg] == ["40"] * 5


def test_compare_rejects_bad_parallel(tmp_path):
    assert main(["compare", "--parallel", "0", "--out", str(tmp_path)]) == 1


def test_plot_scripts_match_csv_schema(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("topologies_per_count = 1\nseeds_per_topology = 1\n[sim]\nduration = 60.0\n")
    main(["compare", "--config", str(cfg), "--algo", "rall,path", "--nodes", "10,12",
          "--out", str(tmp_path)])
    headers = {}
    for name in ("aggregate.csv", "latency_hist.csv"):
        headers[name] = (tmp_path / name).read_text().splitlines()[0].split(",")
    assert headers["aggregate.csv"] == aggregate_columns()
    assert headers["latency_hist.csv"] == LATENCY_COLUMNS
    scripts = sorted((tmp_path / "plots").glob("*.gp"))
    assert {s.name for s in scripts} == set(plot_scripts(["rall"], [10]))
    for script in scripts:
        text = script.read_text()
        (data,) = re.findall(r"'\.\./([\w.]+)'", text)
        assert (script.parent / ".." / data).exists()
        cols = re.findall(r'(?:str)?col(?:umn)?\("(\w+)"\)', text)
        assert cols
        assert set(cols) <= set(headers[data]), script.name
