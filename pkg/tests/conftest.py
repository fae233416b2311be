import pytest

from rall_net.topology import Topology, generate_topology

ACCEPTANCE_LINES = []


def make_topo(links, n=None, sink=0):
    """Topology from {(src, dst): lqi}; positions are irrelevant here."""
    if n is None:
        n = 1 + max(max(s, d) for s, d in links)
    return Topology(positions=[(float(i), 0.0) for i in range(n)], links=dict(links),
                    area_side=50.0, range=15.0, sink=sink)


def both_ways(pairs, lqi=255):
    links = {}
    for s, d in pairs:
        links[(s, d)] = lqi
        links[(d, s)] = lqi
    return links


def random_small_topologies(count, n_min=4, n_max=8, base_seed=0, range_=20.0):
    out = []
    for i in range(count):
        n = n_min + i % (n_max - n_min + 1)
        out.append(generate_topology(n, 50.0, range_, seed=base_seed + i))
    return out


@pytest.fixture
def line4():
    # 3 -> 2 -> 1 -> 0
    return make_topo(both_ways([(0, 1), (1, 2), (2, 3)]))


@pytest.fixture
def star5():
    return make_topo(both_ways([(0, v) for v in range(1, 5)]))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
