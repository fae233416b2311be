from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rall_net.costs import CostParams, normalize_lqi, sum_weights, update_edges
from rall_net.exceptions import InvalidPath
from rall_net.routing import rall
from rall_net.topology import generate_topology

from conftest import both_ways, make_topo


class TestNormalizeLqi:
    def test_at_threshold(self):
        assert normalize_lqi(200, 200) == 0

    def test_above_threshold(self):
        assert normalize_lqi(255, 200) == 0

    def test_half(self):
        assert normalize_lqi(100, 200) == 0.5

    @given(st.integers(0, 255), st.integers(0, 255), st.integers(1, 255))
    def test_monotone_and_bounded(self, a, b, th):
        lo, hi = sorted((a, b))
        assert normalize_lqi(lo, th) >= normalize_lqi(hi, th)
        assert 0 <= normalize_lqi(a, th) <= 1

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            normalize_lqi(256, 200)
        with pytest.raises(ValueError):
            normalize_lqi(10, 0)


class TestCostParams:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            CostParams(w_p=0.6, w_l=0.6)

    def test_p_const_defaults_to_node_count(self, line4):
        assert CostParams().resolve_p_const(line4) == 4


class TestSumWeights:
    def test_good_link(self):
        t = make_topo({(1, 0): 250})
        c = sum_weights(t, CostParams(0.5, 0.5, 200, p_const=50))
        assert c.base[(1, 0)] == 25

    def test_half_quality(self):
        t = make_topo({(1, 0): 100})
        c = sum_weights(t, CostParams(0.5, 0.5, 200, p_const=50))
        assert c.base[(1, 0)] == Fraction(75, 2)

    def test_hop_only(self):
        t = generate_topology(12, 50.0, 20.0, seed=4)
        c = sum_weights(t, CostParams(1.0, 0.0, 200, p_const=12))
        assert set(c.base.values()) == {12}

    def test_initial_state(self):
        t = generate_topology(12, 50.0, 20.0, seed=4)
        c = sum_weights(t, CostParams())
        assert c.working == c.base
        assert set(c.node_load.values()) == {0}
        assert all(v >= 0 for v in c.base.values())


def _three_node_costs():
    # s=2 -> m=1 -> sink=0, plus extra out-edges from 1 and 2
    t = make_topo(both_ways([(0, 1), (1, 2), (0, 2)], lqi=255))
    return t, sum_weights(t, CostParams(0.5, 0.5, 200, p_const=10))


class TestUpdateEdges:
    def test_single_flow(self):
        t, c = _three_node_costs()
        path = [t.link(2, 1), t.link(1, 0)]
        update_edges(path, c)
        assert c.node_load[2] == 1 and c.node_load[1] == 1 and c.node_load[0] == 0
        for e in c.base:
            expected = c.base[e] + (1 if e[0] in (1, 2) else 0)
            assert c.working[e] == expected

    def test_two_flows_through_relay(self):
        t, c = _three_node_costs()
        update_edges([t.link(2, 1), t.link(1, 0)], c)
        update_edges([t.link(1, 0)], c)
        assert c.node_load[1] == 2
        for e in c.out_edges[1]:
            assert c.working[e] == c.base[e] + 2

    def test_broken_chain(self):
        t, c = _three_node_costs()
        with pytest.raises(InvalidPath):
            update_edges([t.link(2, 1), t.link(2, 0)], c)

    def test_must_end_at_sink(self):
        t, c = _three_node_costs()
        with pytest.raises(InvalidPath):
            update_edges([t.link(2, 1)], c)

    def test_deltas_match_independent_recount(self):
        t = generate_topology(25, 50.0, 15.0, seed=21)
        table = rall(t, CostParams())
        c = table.costs
        recount = {v: 0 for v in range(t.n_nodes)}
        for p in table.paths.values():
            for v in p.nodes[:-1]:
                recount[v] += 1
        for (j, h), w in c.working.items():
            assert w - c.base[(j, h)] == recount[j]
